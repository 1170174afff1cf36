#include "mmmc/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mmmc {

bool MicroState::finite() const noexcept {
  return std::all_of(coords.begin(), coords.end(), [](double v) { return std::isfinite(v); });
}

void ReactionCoordinateMap::laplacian(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = input_dim();
  const std::size_t n = output_dim();
  Vector probe(x.begin(), x.end());
  Vector jac_plus(d * n), jac_minus(d * n);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    jacobian(probe, jac_plus);
    probe[i] = x[i] - h;
    jacobian(probe, jac_minus);
    probe[i] = x[i];
    for (std::size_t j = 0; j < n; ++j) {
      out[j] += (jac_plus[i * n + j] - jac_minus[i * n + j]) / (2.0 * h);
    }
  }
}

double ReactionCoordinateMap::scalar(std::span<const double> x) const {
  double z = 0.0;
  value(x, std::span<double>(&z, 1));
  return z;
}

SystemModel::SystemModel(double beta) : beta_(beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("inverse temperature beta must be positive and finite");
  }
}

double SystemModel::potential_and_gradient(std::span<const double> x, std::span<double> g) const {
  gradient(x, g);
  return potential(x);
}

void SystemModel::refresh(MicroState& x) const {
  if (!x.potential || x.gradient.size() != dim()) {
    x.gradient.resize(dim());
    x.potential = potential_and_gradient(x.coords, x.gradient);
  }
  if (!x.reaction_coordinate) x.reaction_coordinate = reaction_coordinate().scalar(x.coords);
}

double SystemModel::rc_value(const MicroState& x) const {
  return x.reaction_coordinate ? *x.reaction_coordinate : reaction_coordinate().scalar(x.coords);
}

double gibbs_log_density(const SystemModel& model, const MicroState& x) {
  for (std::size_t i = 0; i < x.coords.size(); ++i) {
    if (!std::isfinite(x.coords[i])) {
      std::ostringstream msg;
      msg << model.name() << ": coordinate " << i << " is not finite";
      throw DomainError(msg.str(), i);
    }
  }
  const double v = x.potential ? *x.potential : model.potential(x.coords);
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << model.name() << ": potential is not finite at x = (";
    for (std::size_t i = 0; i < x.coords.size(); ++i) msg << (i ? ", " : "") << x.coords[i];
    msg << ")";
    throw DomainError(msg.str());
  }
  return -model.beta() * v;
}

double gradient_check(const SystemModel& model, const MicroState& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("gradient_check: step must be positive");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t d = model.dim();
  Vector analytic(d);
  Vector probe = x.coords;
  try {
    model.gradient(x.coords, analytic);
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double step = h * std::max(1.0, std::abs(x.coords[i]));
      probe[i] = x.coords[i] + step;
      const double plus = model.potential(probe);
      probe[i] = x.coords[i] - step;
      const double minus = model.potential(probe);
      probe[i] = x.coords[i];
      if (!std::isfinite(plus) || !std::isfinite(minus) || !std::isfinite(analytic[i])) return kInf;
      const double numeric = (plus - minus) / (2.0 * step);
      worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i])));
    }
    return worst;
  } catch (const DomainError&) {
    return kInf;
  }
}

}  // namespace mmmc
