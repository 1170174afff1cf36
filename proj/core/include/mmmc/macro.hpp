#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "mmmc/rng.hpp"
#include "mmmc/system.hpp"

namespace mmmc {

/// Approximate free energy A(z) of the reaction coordinate. The induced
/// macroscopic density is mu0(z) ~ exp(-beta A(z)) on `domain()`.
class MacroModel {
 public:
  MacroModel(double beta, Interval domain);
  virtual ~MacroModel() = default;

  virtual std::string_view name() const = 0;
  virtual double free_energy(double z) const = 0;
  virtual double free_energy_grad(double z) const = 0;

  double beta() const noexcept { return beta_; }
  Interval domain() const noexcept { return domain_; }
  /// Unnormalized log mu0(z) = -beta A(z).
  double log_density(double z) const { return -beta_ * free_energy(z); }

 private:
  double beta_;
  Interval domain_;
};

/// Macro model backed by closed-form callables.
class AnalyticMacroModel final : public MacroModel {
 public:
  using Function = std::function<double(double)>;

  AnalyticMacroModel(std::string name, Function free_energy, Function free_energy_grad,
                     double beta, Interval domain);

  std::string_view name() const override { return name_; }
  double free_energy(double z) const override { return a_(z); }
  double free_energy_grad(double z) const override { return da_(z); }

 private:
  std::string name_;
  Function a_;
  Function da_;
};

/// Draws microscopic states on the level set Sigma(z) and evaluates the
/// reconstruction log density log nu(x | z). The normalizing constant of
/// `log_density` is the same for every z.
class ReconstructionSampler {
 public:
  virtual ~ReconstructionSampler() = default;

  virtual std::string_view name() const = 0;
  /// Overwrites `out` (coordinates and caches) with a draw from nu(. | z).
  virtual void sample(double z, RngStream& rng, MicroState& out) const = 0;
  virtual double log_density(const MicroState& x, double z) const = 0;
};

/// Finite-difference check of `free_energy_grad` at z, same convention as
/// `gradient_check`.
double macro_gradient_check(const MacroModel& macro, double z, double h);

/// Integral of exp(-beta A) over the domain by adaptive Gauss-Kronrod
/// quadrature; finite for every usable macro model.
double macro_partition_function(const MacroModel& macro);

}  // namespace mmmc
