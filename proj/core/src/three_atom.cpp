#include <cmath>
#include <numbers>

#include "mmmc/models.hpp"

namespace mmmc {

namespace three_atom {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double well_offset(FreeEnergy variant) {
  return variant == FreeEnergy::A2 ? kShiftedWellOffset : kWellOffset;
}

double double_well(double theta, double offset) {
  const double u = theta - kHalfPi;
  const double w = u * u - offset * offset;
  return kHalfStiffness * w * w;
}

double double_well_grad(double theta, double offset) {
  const double u = theta - kHalfPi;
  return 4.0 * kHalfStiffness * u * (u * u - offset * offset);
}

}  // namespace

double potential(double epsilon, std::span<const double> x) {
  const double r = std::sqrt(x[1] * x[1] + x[2] * x[2]);
  if (!(r > 0.0)) throw DomainError("three_atom: r_c = 0, angle undefined", 1);
  const double theta = std::atan2(x[2], x[1]);
  const double da = x[0] - 1.0;
  const double dr = r - 1.0;
  return (da * da + dr * dr) / (2.0 * epsilon) + double_well(theta, kWellOffset);
}

double free_energy(FreeEnergy variant, double theta) {
  const double a = double_well(theta, well_offset(variant));
  return variant == FreeEnergy::A3 ? a + std::cos(theta) : a;
}

double free_energy_grad(FreeEnergy variant, double theta) {
  const double da = double_well_grad(theta, well_offset(variant));
  return variant == FreeEnergy::A3 ? da - std::sin(theta) : da;
}

}  // namespace three_atom

void ThreeAtomAngle::value(std::span<const double> x, std::span<double> out) const {
  out[0] = std::atan2(x[2], x[1]);
}

void ThreeAtomAngle::jacobian(std::span<const double> x, std::span<double> out) const {
  const double r2 = x[1] * x[1] + x[2] * x[2];
  out[0] = 0.0;
  out[1] = -x[2] / r2;
  out[2] = x[1] / r2;
}

void ThreeAtomAngle::laplacian(std::span<const double>, std::span<double> out) const {
  out[0] = 0.0;
}

namespace {

/// Sigma(theta) parameterized by (x_a, r_c). Surface element d x_a d r_c,
/// co-area factor |grad theta|^-1 = r_c.
class ThreeAtomLevelSet final : public LevelSetParameterization {
 public:
  explicit ThreeAtomLevelSet(double scale) : scale_(scale) {}

  std::size_t n_params() const override { return 2; }
  void embed(double z, std::span<const double> u, std::span<double> x) const override {
    x[0] = u[0];
    x[1] = u[1] * std::cos(z);
    x[2] = u[1] * std::sin(z);
  }
  double weight(double, std::span<const double> u) const override { return u[1]; }
  double center(double, std::size_t) const override { return 1.0; }
  double scale(std::size_t) const override { return scale_; }
  bool separable() const override { return true; }

 private:
  double scale_;
};

}  // namespace

ThreeAtomModel::ThreeAtomModel(double epsilon, double beta)
    : SystemModel(beta),
      epsilon_(epsilon),
      level_set_(std::make_unique<ThreeAtomLevelSet>(std::sqrt(epsilon / beta))) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("three_atom: epsilon must be positive");
}

bool ThreeAtomModel::in_domain(std::span<const double> x) const {
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]) &&
         (x[1] != 0.0 || x[2] != 0.0);
}

double ThreeAtomModel::potential(std::span<const double> x) const {
  return three_atom::potential(epsilon_, x);
}

void ThreeAtomModel::gradient(std::span<const double> x, std::span<double> g) const {
  potential_and_gradient(x, g);
}

double ThreeAtomModel::potential_and_gradient(std::span<const double> x,
                                              std::span<double> g) const {
  const double r2 = x[1] * x[1] + x[2] * x[2];
  const double r = std::sqrt(r2);
  if (!(r > 0.0)) throw DomainError("three_atom: r_c = 0, angle undefined", 1);
  const double theta = std::atan2(x[2], x[1]);
  const double da = x[0] - 1.0;
  const double dr = r - 1.0;
  const double dv_dr = dr / epsilon_;
  const double dv_dtheta = three_atom::free_energy_grad(three_atom::FreeEnergy::A1, theta);
  g[0] = da / epsilon_;
  g[1] = dv_dr * x[1] / r - dv_dtheta * x[2] / r2;
  g[2] = dv_dr * x[2] / r + dv_dtheta * x[1] / r2;
  return (da * da + dr * dr) / (2.0 * epsilon_) +
         three_atom::free_energy(three_atom::FreeEnergy::A1, theta);
}

ThreeAtomReconstruction::ThreeAtomReconstruction(three_atom::Reconstruction variant,
                                                 double epsilon, double beta)
    : variant_(variant),
      variance_((variant == three_atom::Reconstruction::Nu2 ? 2.0 : 1.0) * epsilon / beta),
      std_(std::sqrt(variance_)),
      log_norm_(-std::log(2.0 * std::numbers::pi * variance_)) {
  if (!(epsilon > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("three_atom reconstruction: epsilon and beta must be positive");
  }
}

std::string_view ThreeAtomReconstruction::name() const {
  return variant_ == three_atom::Reconstruction::Nu1 ? "nu1" : "nu2";
}

void ThreeAtomReconstruction::sample(double theta, RngStream& rng, MicroState& out) const {
  const double xa = 1.0 + std_ * rng.normal();
  double r = 1.0 + std_ * rng.normal();
  while (!(r > 0.0)) {
    resampled_.fetch_add(1, std::memory_order_relaxed);
    r = 1.0 + std_ * rng.normal();
  }
  out.coords.resize(3);
  out.coords[0] = xa;
  out.coords[1] = r * std::cos(theta);
  out.coords[2] = r * std::sin(theta);
  out.invalidate();
}

double ThreeAtomReconstruction::log_density(const MicroState& x, double) const {
  const double r = std::sqrt(x.coords[1] * x.coords[1] + x.coords[2] * x.coords[2]);
  const double da = x.coords[0] - 1.0;
  const double dr = r - 1.0;
  return log_norm_ - (da * da + dr * dr) / (2.0 * variance_);
}

std::unique_ptr<MacroModel> make_three_atom_macro(three_atom::FreeEnergy variant, double beta) {
  static constexpr const char* kNames[] = {"A1", "A2", "A3"};
  return std::make_unique<AnalyticMacroModel>(
      kNames[static_cast<int>(variant)],
      [variant](double t) { return three_atom::free_energy(variant, t); },
      [variant](double t) { return three_atom::free_energy_grad(variant, t); }, beta,
      Interval{0.0, std::numbers::pi});
}

}  // namespace mmmc
