#pragma once

// Microscopic MALA, the macroscopic Metropolis-Hastings kernel on the
// reaction coordinate, the composite micro-macro step and the chain driver.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>

#include "mmmc/macro.hpp"
#include "mmmc/rng.hpp"
#include "mmmc/system.hpp"

namespace mmmc {

class CoefficientTable;

enum class ProposalKind {
  Langevin,   // drift -A'(z), unit diffusion
  Brownian,   // no drift
  Effective,  // drift b(z), diffusion sigma2(z) from a coefficient table
};

std::string_view to_string(ProposalKind kind);

struct MacroProposalKernel {
  ProposalKind kind = ProposalKind::Langevin;
  double dt = 0.01;
  const CoefficientTable* table = nullptr;  // required for Effective
};

struct MacroProposal {
  double z = 0.0;
  double log_q_fwd = 0.0;
  double log_q_rev = 0.0;
};

/// Gaussian transition log density log q0(to | from), normalized.
/// -inf when an Effective kernel is evaluated outside its table.
double macro_log_q(const MacroProposalKernel& kernel, const MacroModel& macro, double to,
                   double from);

MacroProposal macro_propose(const MacroProposalKernel& kernel, const MacroModel& macro, double z,
                            RngStream& rng);
/// Same with the standard normal increment supplied.
MacroProposal macro_propose(const MacroProposalKernel& kernel, const MacroModel& macro, double z,
                            double eta);

/// min{1, exp(log_ratio)} with the exponent clamped to [-745, 0]; NaN maps to 0.
double accept_from_log_ratio(double log_ratio) noexcept;

/// Coarse-level acceptance; 0 if z_new lies outside the macro domain.
double macro_accept_prob(const MacroModel& macro, double z, double z_new, double log_q_fwd,
                         double log_q_rev);

struct MicroAcceptance {
  double prob = 0.0;
  bool nonfinite = false;
};

/// Fine-level acceptance of a reconstructed x_new given the current x.
/// Non-finite terms give probability 0 with the flag set.
MicroAcceptance micro_accept_prob(const SystemModel& model, const MacroModel& macro,
                                  const ReconstructionSampler& recon, const MicroState& x,
                                  const MicroState& x_new);

struct StepOutcome {
  bool macro_proposed = false;
  bool macro_accepted = false;
  bool micro_proposed = false;
  bool micro_accepted = false;
  bool nonfinite = false;
  double micro_alpha = std::numeric_limits<double>::quiet_NaN();
};

/// A Markov kernel updating a state in place. Kernels hold scratch storage and
/// are not shared between chains.
class ChainKernel {
 public:
  virtual ~ChainKernel() = default;
  virtual std::string_view name() const = 0;
  virtual StepOutcome step(MicroState& x, RngStream& rng) = 0;
};

/// Metropolis-adjusted Euler-Maruyama step on the Gibbs measure.
class MalaKernel final : public ChainKernel {
 public:
  MalaKernel(const SystemModel& model, double dt);

  std::string_view name() const override { return "mala"; }
  StepOutcome step(MicroState& x, RngStream& rng) override;

 private:
  const SystemModel& model_;
  double dt_;
  double noise_;
  MicroState proposal_;
};

/// One micro-macro step: restrict, macroscopic proposal and accept/reject,
/// reconstruction and fine-level accept/reject. Exactly one macroscopic
/// proposal per call.
class MmKernel final : public ChainKernel {
 public:
  MmKernel(const SystemModel& model, const MacroModel& macro, MacroProposalKernel kernel,
           const ReconstructionSampler& recon);

  std::string_view name() const override { return "mm"; }
  StepOutcome step(MicroState& x, RngStream& rng) override;

 private:
  struct Terms {
    double z = 0.0;
    double log_mu = 0.0;
    double log_mu0 = 0.0;
    double log_nu = 0.0;
  };

  void restrict_current(const MicroState& x);

  const SystemModel& model_;
  const MacroModel& macro_;
  MacroProposalKernel kernel_;
  const ReconstructionSampler& recon_;
  MicroState proposal_;
  Vector cached_coords_;
  Terms current_;
};

/// Single steps with throwaway scratch storage.
StepOutcome mala_step(const SystemModel& model, MicroState& x, double dt, RngStream& rng);
StepOutcome mm_step(const SystemModel& model, const MacroModel& macro,
                    const MacroProposalKernel& kernel, const ReconstructionSampler& recon,
                    MicroState& x, RngStream& rng);

using Observable = std::function<double(const MicroState&)>;

/// Observable xi(x) of `model`.
Observable rc_observable(const SystemModel& model);

struct ChainOptions {
  /// Record every thin-th state (counters always cover every step).
  std::size_t thin = 1;
  bool record = true;
  /// Called with the observable of every step, after recording.
  std::function<void(double)> on_value;
};

struct ChainTrace {
  Vector observable;
  std::vector<std::uint8_t> macro_flags;
  std::vector<std::uint8_t> micro_flags;
  std::size_t thin = 1;

  std::uint64_t n_steps = 0;
  std::uint64_t macro_proposed = 0;
  std::uint64_t macro_accepted = 0;
  std::uint64_t micro_proposed = 0;
  std::uint64_t micro_accepted = 0;
  std::uint64_t nonfinite = 0;
  double min_micro_alpha = 1.0;
  double max_micro_alpha_deviation = 0.0;  // max |alpha_F - 1|
  double observable_sum = 0.0;
  double wall_time = 0.0;  // seconds, sampling loop only

  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  bool valid = true;
  std::string error;

  /// Mean of the observable over every step.
  double mean() const;
  double macro_acceptance() const;
  /// Relative to accepted macroscopic proposals.
  double micro_acceptance() const;
};

/// Runs n_steps of `kernel` from x0. Exceptions abort the chain and return
/// the partial trace with `valid == false`.
ChainTrace run_chain(ChainKernel& kernel, MicroState x0, std::uint64_t n_steps,
                     const Observable& observable, RngStream& rng, const ChainOptions& options = {});

}  // namespace mmmc
