#include <cmath>
#include <numbers>

#include "mmmc/models.hpp"

namespace mmmc {

double wrap_angle(double phi) {
  const double w = std::remainder(phi, 2.0 * std::numbers::pi);
  return w == -std::numbers::pi ? std::numbers::pi : w;
}

CoordinateProjection::CoordinateProjection(std::size_t dim, std::size_t index, bool periodic)
    : dim_(dim), index_(index), periodic_(periodic) {
  if (index >= dim) throw std::invalid_argument("coordinate projection: index out of range");
}

void CoordinateProjection::value(std::span<const double> x, std::span<double> out) const {
  out[0] = periodic_ ? wrap_angle(x[index_]) : x[index_];
}

void CoordinateProjection::jacobian(std::span<const double>, std::span<double> out) const {
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(dim_), 0.0);
  out[index_] = 1.0;
}

void CoordinateProjection::laplacian(std::span<const double>, std::span<double> out) const {
  out[0] = 0.0;
}

namespace toy {

double free_energy(double u) {
  const double w = u * u - 1.0;
  return w * w;
}

double free_energy_grad(double u) { return 4.0 * u * (u * u - 1.0); }

}  // namespace toy

namespace {

class ToyLevelSet final : public LevelSetParameterization {
 public:
  explicit ToyLevelSet(double scale) : scale_(scale) {}

  std::size_t n_params() const override { return 1; }
  void embed(double z, std::span<const double> u, std::span<double> x) const override {
    x[0] = z;
    x[1] = u[0];
  }
  double weight(double, std::span<const double>) const override { return 1.0; }
  double center(double z, std::size_t) const override { return z; }
  double scale(std::size_t) const override { return scale_; }
  bool separable() const override { return true; }

 private:
  double scale_;
};

}  // namespace

SyntheticToyModel::SyntheticToyModel(double epsilon, double beta)
    : SystemModel(beta),
      epsilon_(epsilon),
      projection_(2, 0),
      level_set_(std::make_unique<ToyLevelSet>(std::sqrt(epsilon / beta))) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("toy: epsilon must be positive");
}

bool SyntheticToyModel::in_domain(std::span<const double> x) const {
  return std::isfinite(x[0]) && std::isfinite(x[1]);
}

double SyntheticToyModel::potential(std::span<const double> x) const {
  const double d = x[1] - x[0];
  return toy::free_energy(x[0]) + d * d / (2.0 * epsilon_);
}

void SyntheticToyModel::gradient(std::span<const double> x, std::span<double> g) const {
  const double d = (x[1] - x[0]) / epsilon_;
  g[0] = toy::free_energy_grad(x[0]) - d;
  g[1] = d;
}

ToyReconstruction::ToyReconstruction(double epsilon, double beta)
    : variance_(epsilon / beta),
      std_(std::sqrt(variance_)),
      log_norm_(-0.5 * std::log(2.0 * std::numbers::pi * variance_)) {
  if (!(epsilon > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("toy reconstruction: epsilon and beta must be positive");
  }
}

void ToyReconstruction::sample(double z, RngStream& rng, MicroState& out) const {
  out.coords.resize(2);
  out.coords[0] = z;
  out.coords[1] = z + std_ * rng.normal();
  out.invalidate();
}

double ToyReconstruction::log_density(const MicroState& x, double z) const {
  const double d = x.coords[1] - z;
  return log_norm_ - d * d / (2.0 * variance_);
}

std::unique_ptr<MacroModel> make_toy_macro(double beta) {
  return std::make_unique<AnalyticMacroModel>("A_toy", toy::free_energy, toy::free_energy_grad,
                                              beta, Interval{-3.0, 3.0});
}

}  // namespace mmmc
