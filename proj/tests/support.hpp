#pragma once

#include <numbers>

#include "mmmc/models.hpp"
#include "mmmc/system.hpp"

namespace mmmc::testing {

/// V(x) = |x|^2 / 2 in `dim` dimensions, xi = x[0].
class QuadraticModel final : public SystemModel {
 public:
  explicit QuadraticModel(std::size_t dim = 1, double beta = 1.0)
      : SystemModel(beta), dim_(dim), projection_(dim, 0) {}

  std::string_view name() const override { return "quadratic"; }
  std::size_t dim() const override { return dim_; }
  bool in_domain(std::span<const double>) const override { return true; }
  double potential(std::span<const double> x) const override {
    double v = 0.0;
    for (double c : x) v += 0.5 * c * c;
    return v;
  }
  void gradient(std::span<const double> x, std::span<double> g) const override {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i];
  }
  const ReactionCoordinateMap& reaction_coordinate() const override { return projection_; }
  Interval rc_domain() const override { return {-10.0, 10.0}; }

 private:
  std::size_t dim_;
  CoordinateProjection projection_;
};

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

}  // namespace mmmc::testing
