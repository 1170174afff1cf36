#include "mmmc/macro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mmmc {

MacroModel::MacroModel(double beta, Interval domain) : beta_(beta), domain_(domain) {
  if (!(beta > 0.0)) throw std::invalid_argument("macro model: beta must be positive");
  if (!(domain.hi > domain.lo)) throw std::invalid_argument("macro model: empty domain");
}

AnalyticMacroModel::AnalyticMacroModel(std::string name, Function free_energy,
                                       Function free_energy_grad, double beta, Interval domain)
    : MacroModel(beta, domain),
      name_(std::move(name)),
      a_(std::move(free_energy)),
      da_(std::move(free_energy_grad)) {}

double macro_gradient_check(const MacroModel& macro, double z, double h) {
  const double step = h * std::max(1.0, std::abs(z));
  const double analytic = macro.free_energy_grad(z);
  const double numeric =
      (macro.free_energy(z + step) - macro.free_energy(z - step)) / (2.0 * step);
  if (!std::isfinite(analytic) || !std::isfinite(numeric)) return INFINITY;
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

double macro_partition_function(const MacroModel& macro) {
  const Interval h = macro.domain();
  // Shift by the free-energy minimum on a coarse scan to keep exp() in range.
  double a_min = INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    a_min = std::min(a_min, macro.free_energy(h.lo + h.width() * i / 1000.0));
  }
  auto integrand = [&](double z) { return std::exp(-macro.beta() * (macro.free_energy(z) - a_min)); };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, h.lo, h.hi, 15, 1e-12);
  return integral * std::exp(-macro.beta() * a_min);
}

}  // namespace mmmc
