#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmmc {

using Vector = std::vector<double>;

/// Raised when a configuration leaves the chart on which a model is defined,
/// or an energy evaluates to a non-finite value.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, std::optional<std::size_t> coordinate = std::nullopt)
      : std::domain_error(what), coordinate_(coordinate) {}

  /// Index of the offending coordinate, when one can be singled out.
  std::optional<std::size_t> coordinate() const noexcept { return coordinate_; }

 private:
  std::optional<std::size_t> coordinate_;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double z) const noexcept { return z >= lo && z <= hi; }
  double width() const noexcept { return hi - lo; }
};

/// A point of the microscopic chart together with write-once energy caches.
///
/// The caches belong to the coordinates: anything that writes `coords` must
/// call `invalidate()`.
struct MicroState {
  Vector coords;
  std::optional<double> potential;
  Vector gradient;  // empty unless cached
  std::optional<double> reaction_coordinate;

  MicroState() = default;
  explicit MicroState(Vector x) : coords(std::move(x)) {}

  std::size_t dim() const noexcept { return coords.size(); }
  bool finite() const noexcept;
  void invalidate() noexcept {
    potential.reset();
    gradient.clear();
    reaction_coordinate.reset();
  }
};

/// Reaction coordinate xi: R^d -> R^n with Jacobian and Laplacian.
class ReactionCoordinateMap {
 public:
  virtual ~ReactionCoordinateMap() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const { return 1; }

  virtual void value(std::span<const double> x, std::span<double> out) const = 0;
  /// Row-major d x n matrix of partial derivatives d xi_j / d x_i.
  virtual void jacobian(std::span<const double> x, std::span<double> out) const = 0;
  /// Laplacian of each output component. The default uses central
  /// differences of the Jacobian.
  virtual void laplacian(std::span<const double> x, std::span<double> out) const;

  /// Convenience for scalar reaction coordinates.
  double scalar(std::span<const double> x) const;
};

/// Parameterization of the level set Sigma(z) used by the quadrature oracles.
///
/// Parameters u map to a configuration x(z, u) with xi(x) = z. `weight` is the
/// surface measure times (det G)^(-1/2) in the model chart. Each parameter
/// carries a reference Gaussian scale from which integration bounds are built.
class LevelSetParameterization {
 public:
  virtual ~LevelSetParameterization() = default;

  virtual std::size_t n_params() const = 0;
  virtual void embed(double z, std::span<const double> u, std::span<double> x) const = 0;
  virtual double weight(double z, std::span<const double> u) const = 0;
  virtual double center(double z, std::size_t param) const = 0;
  virtual double scale(std::size_t param) const = 0;
  /// True when V restricted to Sigma(z) is a sum of one-parameter terms, so
  /// that the level-set integral factorizes into one-dimensional integrals.
  virtual bool separable() const { return false; }
};

/// A Gibbs system: potential V, its gradient, a reaction coordinate and the
/// inverse temperature beta.
class SystemModel {
 public:
  explicit SystemModel(double beta);
  virtual ~SystemModel() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t dim() const = 0;
  double beta() const noexcept { return beta_; }

  /// True if x lies inside the chart domain. Evaluations outside throw.
  virtual bool in_domain(std::span<const double> x) const = 0;
  virtual double potential(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> g) const = 0;
  virtual double potential_and_gradient(std::span<const double> x, std::span<double> g) const;

  virtual const ReactionCoordinateMap& reaction_coordinate() const = 0;
  /// Image of the reaction coordinate used for macroscopic sampling.
  virtual Interval rc_domain() const = 0;
  virtual const LevelSetParameterization* level_set() const { return nullptr; }

  /// Fill the potential, gradient and reaction-coordinate caches of x.
  void refresh(MicroState& x) const;
  double rc_value(const MicroState& x) const;

 private:
  double beta_;
};

/// Unnormalized Gibbs log density -beta V(x).
double gibbs_log_density(const SystemModel& model, const MicroState& x);

/// Maximum over coordinates of |analytic - central difference| / max(1, |analytic|).
/// Returns +inf when the potential is not finite at or near x.
double gradient_check(const SystemModel& model, const MicroState& x, double h);

}  // namespace mmmc
