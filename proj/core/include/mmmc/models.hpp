#pragma once

// Bundled benchmark systems: the planar three-atom molecule, united-atom
// butane in internal coordinates, and an analytic two-dimensional toy.

#include <atomic>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string_view>

#include "mmmc/macro.hpp"
#include "mmmc/system.hpp"

namespace mmmc {

/// xi(x) = x[index]. A periodic projection wraps the value into (-pi, pi].
class CoordinateProjection final : public ReactionCoordinateMap {
 public:
  CoordinateProjection(std::size_t dim, std::size_t index, bool periodic = false);

  std::size_t input_dim() const override { return dim_; }
  void value(std::span<const double> x, std::span<double> out) const override;
  void jacobian(std::span<const double> x, std::span<double> out) const override;
  void laplacian(std::span<const double> x, std::span<double> out) const override;

 private:
  std::size_t dim_;
  std::size_t index_;
  bool periodic_;
};

/// Representative of an angle in (-pi, pi]; identity on that interval.
double wrap_angle(double phi);

// ---------------------------------------------------------------------------
// Three-atom molecule. Chart: (x_a, x_c, y_c); atom B at the origin, atom A on
// the x axis. Reaction coordinate: the bending angle theta = atan2(y_c, x_c).

namespace three_atom {

inline constexpr double kHalfStiffness = 104.0;  // 208 / 2
inline constexpr double kWellOffset = 0.3838;
inline constexpr double kShiftedWellOffset = 0.4838;

enum class FreeEnergy { A1, A2, A3 };
enum class Reconstruction { Nu1, Nu2 };

double potential(double epsilon, std::span<const double> x);
double free_energy(FreeEnergy variant, double theta);
double free_energy_grad(FreeEnergy variant, double theta);

}  // namespace three_atom

class ThreeAtomAngle final : public ReactionCoordinateMap {
 public:
  std::size_t input_dim() const override { return 3; }
  void value(std::span<const double> x, std::span<double> out) const override;
  void jacobian(std::span<const double> x, std::span<double> out) const override;
  /// atan2 is harmonic in the plane.
  void laplacian(std::span<const double> x, std::span<double> out) const override;
};

class ThreeAtomModel final : public SystemModel {
 public:
  ThreeAtomModel(double epsilon, double beta);

  std::string_view name() const override { return "three_atom"; }
  std::size_t dim() const override { return 3; }
  double epsilon() const noexcept { return epsilon_; }

  bool in_domain(std::span<const double> x) const override;
  double potential(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  double potential_and_gradient(std::span<const double> x, std::span<double> g) const override;
  const ReactionCoordinateMap& reaction_coordinate() const override { return angle_; }
  /// Both wells lie inside [0, pi].
  Interval rc_domain() const override { return {0.0, std::numbers::pi}; }
  const LevelSetParameterization* level_set() const override { return level_set_.get(); }

 private:
  double epsilon_;
  ThreeAtomAngle angle_;
  std::unique_ptr<LevelSetParameterization> level_set_;
};

/// Gaussian reconstruction of (x_a, r_c) around unit bond lengths with
/// variance epsilon/beta (Nu1, exact) or 2 epsilon/beta (Nu2). Negative r_c
/// draws are resampled.
class ThreeAtomReconstruction final : public ReconstructionSampler {
 public:
  ThreeAtomReconstruction(three_atom::Reconstruction variant, double epsilon, double beta);

  std::string_view name() const override;
  void sample(double theta, RngStream& rng, MicroState& out) const override;
  double log_density(const MicroState& x, double theta) const override;
  double variance() const noexcept { return variance_; }
  /// Number of r_c draws discarded for being non-positive, summed over all
  /// calls on this sampler.
  std::uint64_t resampled() const noexcept { return resampled_.load(std::memory_order_relaxed); }

 private:
  three_atom::Reconstruction variant_;
  double variance_;
  double std_;
  double log_norm_;
  mutable std::atomic<std::uint64_t> resampled_{0};
};

std::unique_ptr<MacroModel> make_three_atom_macro(three_atom::FreeEnergy variant, double beta);

// ---------------------------------------------------------------------------
// United-atom butane. Chart: (r1, r2, r3, theta1, theta2, phi) with bond
// lengths, bending angles in radians and the torsion phi in (-pi, pi].

namespace butane {

inline constexpr double kBondStiffness = 1.17e6;
inline constexpr double kBondLength = 1.53;
inline constexpr double kAngleStiffness = 62500.0;
inline constexpr double kAngle = 112.0 * std::numbers::pi / 180.0;
inline constexpr double kC0 = 1031.36;
inline constexpr double kC1 = 2037.82;
inline constexpr double kC2 = 158.52;
inline constexpr double kC3 = -3227.7;
inline constexpr std::size_t kTorsionIndex = 5;

double potential(std::span<const double> q);
/// Torsion polynomial c0 + c1 cos + c2 cos^2 + c3 cos^3.
double free_energy(double phi);
double free_energy_grad(double phi);

}  // namespace butane

class ButaneModel final : public SystemModel {
 public:
  explicit ButaneModel(double beta);

  std::string_view name() const override { return "butane"; }
  std::size_t dim() const override { return 6; }

  bool in_domain(std::span<const double> q) const override;
  double potential(std::span<const double> q) const override;
  void gradient(std::span<const double> q, std::span<double> g) const override;
  double potential_and_gradient(std::span<const double> q, std::span<double> g) const override;
  const ReactionCoordinateMap& reaction_coordinate() const override { return torsion_; }
  Interval rc_domain() const override { return {-std::numbers::pi, std::numbers::pi}; }
  const LevelSetParameterization* level_set() const override { return level_set_.get(); }

  /// Equilibrium bonds and angles with the given torsion.
  static Vector equilibrium(double phi = 0.0);

 private:
  CoordinateProjection torsion_;
  std::unique_ptr<LevelSetParameterization> level_set_;
};

/// Exact reconstruction: independent Gaussian bonds and angles at fixed phi.
class ButaneReconstruction final : public ReconstructionSampler {
 public:
  explicit ButaneReconstruction(double beta);

  std::string_view name() const override { return "exact"; }
  void sample(double phi, RngStream& rng, MicroState& out) const override;
  double log_density(const MicroState& q, double phi) const override;
  double bond_std() const noexcept { return bond_std_; }
  double angle_std() const noexcept { return angle_std_; }

 private:
  double beta_;
  double bond_std_;
  double angle_std_;
  double log_norm_;
};

std::unique_ptr<MacroModel> make_butane_macro(double beta);

// ---------------------------------------------------------------------------
// Synthetic toy: V(x1, x2) = (x1^2 - 1)^2 + (x2 - x1)^2 / (2 eps), xi = x1.
// The x1 marginal is exactly proportional to exp(-beta (x1^2 - 1)^2).

namespace toy {

double free_energy(double u);
double free_energy_grad(double u);

}  // namespace toy

class SyntheticToyModel final : public SystemModel {
 public:
  SyntheticToyModel(double epsilon, double beta);

  std::string_view name() const override { return "toy"; }
  std::size_t dim() const override { return 2; }
  double epsilon() const noexcept { return epsilon_; }

  bool in_domain(std::span<const double> x) const override;
  double potential(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  const ReactionCoordinateMap& reaction_coordinate() const override { return projection_; }
  Interval rc_domain() const override { return {-3.0, 3.0}; }
  const LevelSetParameterization* level_set() const override { return level_set_.get(); }

 private:
  double epsilon_;
  CoordinateProjection projection_;
  std::unique_ptr<LevelSetParameterization> level_set_;
};

/// x2 ~ Normal(z, eps / beta): the exact conditional of the toy.
class ToyReconstruction final : public ReconstructionSampler {
 public:
  ToyReconstruction(double epsilon, double beta);

  std::string_view name() const override { return "exact"; }
  void sample(double z, RngStream& rng, MicroState& out) const override;
  double log_density(const MicroState& x, double z) const override;

 private:
  double variance_;
  double std_;
  double log_norm_;
};

std::unique_ptr<MacroModel> make_toy_macro(double beta);

}  // namespace mmmc
