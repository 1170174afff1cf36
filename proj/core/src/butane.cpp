#include <cmath>
#include <numbers>
#include <sstream>

#include "mmmc/models.hpp"

namespace mmmc {

namespace butane {

namespace {

void check_chart(std::span<const double> q) {
  for (std::size_t i = 0; i < 6; ++i) {
    if (!std::isfinite(q[i])) {
      std::ostringstream msg;
      msg << "butane: coordinate " << i << " is not finite";
      throw DomainError(msg.str(), i);
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(q[i] > 0.0)) {
      std::ostringstream msg;
      msg << "butane: bond length r" << i + 1 << " = " << q[i] << " is not positive";
      throw DomainError(msg.str(), i);
    }
  }
  for (std::size_t i = 3; i < 5; ++i) {
    if (!(q[i] > 0.0 && q[i] < std::numbers::pi)) {
      std::ostringstream msg;
      msg << "butane: bending angle theta" << i - 2 << " = " << q[i] << " outside (0, pi)";
      throw DomainError(msg.str(), i);
    }
  }
}

}  // namespace

double free_energy(double phi) {
  const double c = std::cos(phi);
  return kC0 + c * (kC1 + c * (kC2 + c * kC3));
}

double free_energy_grad(double phi) {
  const double c = std::cos(phi);
  return -std::sin(phi) * (kC1 + c * (2.0 * kC2 + c * 3.0 * kC3));
}

double potential(std::span<const double> q) {
  check_chart(q);
  double v = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double d = q[i] - kBondLength;
    v += 0.5 * kBondStiffness * d * d;
  }
  for (std::size_t i = 3; i < 5; ++i) {
    const double d = q[i] - kAngle;
    v += 0.5 * kAngleStiffness * d * d;
  }
  return v + free_energy(q[kTorsionIndex]);
}

}  // namespace butane

namespace {

class ButaneLevelSet final : public LevelSetParameterization {
 public:
  explicit ButaneLevelSet(double beta)
      : bond_scale_(1.0 / std::sqrt(beta * butane::kBondStiffness)),
        angle_scale_(1.0 / std::sqrt(beta * butane::kAngleStiffness)) {}

  std::size_t n_params() const override { return 5; }
  void embed(double z, std::span<const double> u, std::span<double> x) const override {
    for (std::size_t i = 0; i < 5; ++i) x[i] = u[i];
    x[butane::kTorsionIndex] = z;
  }
  double weight(double, std::span<const double>) const override { return 1.0; }
  double center(double, std::size_t i) const override {
    return i < 3 ? butane::kBondLength : butane::kAngle;
  }
  double scale(std::size_t i) const override { return i < 3 ? bond_scale_ : angle_scale_; }
  bool separable() const override { return true; }

 private:
  double bond_scale_;
  double angle_scale_;
};

}  // namespace

ButaneModel::ButaneModel(double beta)
    : SystemModel(beta),
      torsion_(6, butane::kTorsionIndex, true),
      level_set_(std::make_unique<ButaneLevelSet>(beta)) {}

bool ButaneModel::in_domain(std::span<const double> q) const {
  for (double v : q) {
    if (!std::isfinite(v)) return false;
  }
  return q[0] > 0.0 && q[1] > 0.0 && q[2] > 0.0 && q[3] > 0.0 && q[3] < std::numbers::pi &&
         q[4] > 0.0 && q[4] < std::numbers::pi;
}

double ButaneModel::potential(std::span<const double> q) const { return butane::potential(q); }

void ButaneModel::gradient(std::span<const double> q, std::span<double> g) const {
  potential_and_gradient(q, g);
}

double ButaneModel::potential_and_gradient(std::span<const double> q, std::span<double> g) const {
  const double v = butane::potential(q);
  for (std::size_t i = 0; i < 3; ++i) g[i] = butane::kBondStiffness * (q[i] - butane::kBondLength);
  for (std::size_t i = 3; i < 5; ++i) g[i] = butane::kAngleStiffness * (q[i] - butane::kAngle);
  g[butane::kTorsionIndex] = butane::free_energy_grad(q[butane::kTorsionIndex]);
  return v;
}

Vector ButaneModel::equilibrium(double phi) {
  return {butane::kBondLength, butane::kBondLength, butane::kBondLength,
          butane::kAngle,      butane::kAngle,      phi};
}

ButaneReconstruction::ButaneReconstruction(double beta)
    : beta_(beta),
      bond_std_(1.0 / std::sqrt(beta * butane::kBondStiffness)),
      angle_std_(1.0 / std::sqrt(beta * butane::kAngleStiffness)),
      log_norm_(-1.5 * std::log(2.0 * std::numbers::pi * bond_std_ * bond_std_) -
                std::log(2.0 * std::numbers::pi * angle_std_ * angle_std_)) {
  if (!(beta > 0.0)) throw std::invalid_argument("butane reconstruction: beta must be positive");
}

void ButaneReconstruction::sample(double phi, RngStream& rng, MicroState& out) const {
  out.coords.resize(6);
  for (std::size_t i = 0; i < 3; ++i) {
    double r;
    do {
      r = butane::kBondLength + bond_std_ * rng.normal();
    } while (!(r > 0.0));
    out.coords[i] = r;
  }
  for (std::size_t i = 3; i < 5; ++i) {
    double t;
    do {
      t = butane::kAngle + angle_std_ * rng.normal();
    } while (!(t > 0.0 && t < std::numbers::pi));
    out.coords[i] = t;
  }
  out.coords[butane::kTorsionIndex] = phi;
  out.invalidate();
}

double ButaneReconstruction::log_density(const MicroState& q, double) const {
  double v = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double d = q.coords[i] - butane::kBondLength;
    v += 0.5 * butane::kBondStiffness * d * d;
  }
  for (std::size_t i = 3; i < 5; ++i) {
    const double d = q.coords[i] - butane::kAngle;
    v += 0.5 * butane::kAngleStiffness * d * d;
  }
  return log_norm_ - beta_ * v;
}

std::unique_ptr<MacroModel> make_butane_macro(double beta) {
  return std::make_unique<AnalyticMacroModel>("torsion", butane::free_energy,
                                              butane::free_energy_grad, beta,
                                              Interval{-std::numbers::pi, std::numbers::pi});
}

}  // namespace mmmc
