#include "mmmc/samplers.hpp"

#include <cmath>
#include <numbers>

#include "mmmc/effective.hpp"

namespace mmmc {

std::string_view to_string(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::Langevin: return "langevin";
    case ProposalKind::Brownian: return "brownian";
    case ProposalKind::Effective: return "effective";
  }
  return "unknown";
}

namespace {

struct GaussianMove {
  double mean;
  double variance;
};

/// Mean and variance of q0(. | from); nullopt outside an effective table.
std::optional<GaussianMove> transition(const MacroProposalKernel& kernel, const MacroModel& macro,
                                       double from) {
  const double diffusion = 2.0 * kernel.dt / macro.beta();
  switch (kernel.kind) {
    case ProposalKind::Langevin:
      return GaussianMove{from - macro.free_energy_grad(from) * kernel.dt, diffusion};
    case ProposalKind::Brownian:
      return GaussianMove{from, diffusion};
    case ProposalKind::Effective: {
      if (kernel.table == nullptr) {
        throw std::invalid_argument("effective macro proposal requires a coefficient table");
      }
      if (!kernel.table->range().contains(from)) return std::nullopt;
      const CoefficientSample c = kernel.table->interpolate(from);
      return GaussianMove{from + c.b * kernel.dt, diffusion * c.sigma2};
    }
  }
  return std::nullopt;
}

double gaussian_log_density(double x, const GaussianMove& g) {
  const double d = x - g.mean;
  return -d * d / (2.0 * g.variance) - 0.5 * std::log(2.0 * std::numbers::pi * g.variance);
}

}  // namespace

double macro_log_q(const MacroProposalKernel& kernel, const MacroModel& macro, double to,
                   double from) {
  const auto move = transition(kernel, macro, from);
  if (!move) return -std::numeric_limits<double>::infinity();
  return gaussian_log_density(to, *move);
}

MacroProposal macro_propose(const MacroProposalKernel& kernel, const MacroModel& macro, double z,
                            double eta) {
  const auto move = transition(kernel, macro, z);
  if (!move) throw std::out_of_range("macro proposal from outside the coefficient table");
  MacroProposal p;
  p.z = move->mean + std::sqrt(move->variance) * eta;
  p.log_q_fwd = gaussian_log_density(p.z, *move);
  p.log_q_rev = macro_log_q(kernel, macro, z, p.z);
  return p;
}

MacroProposal macro_propose(const MacroProposalKernel& kernel, const MacroModel& macro, double z,
                            RngStream& rng) {
  return macro_propose(kernel, macro, z, rng.normal());
}

double accept_from_log_ratio(double log_ratio) noexcept {
  if (std::isnan(log_ratio)) return 0.0;
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(std::max(log_ratio, -745.0));
}

double macro_accept_prob(const MacroModel& macro, double z, double z_new, double log_q_fwd,
                         double log_q_rev) {
  if (!macro.domain().contains(z_new)) return 0.0;
  const double log_ratio =
      -macro.beta() * (macro.free_energy(z_new) - macro.free_energy(z)) + log_q_rev - log_q_fwd;
  return accept_from_log_ratio(log_ratio);
}

MicroAcceptance micro_accept_prob(const SystemModel& model, const MacroModel& macro,
                                  const ReconstructionSampler& recon, const MicroState& x,
                                  const MicroState& x_new) {
  try {
    const double z = model.rc_value(x);
    const double z_new = model.rc_value(x_new);
    const double log_ratio = (gibbs_log_density(model, x_new) - gibbs_log_density(model, x)) +
                             (macro.log_density(z) - macro.log_density(z_new)) +
                             (recon.log_density(x, z) - recon.log_density(x_new, z_new));
    if (!std::isfinite(log_ratio)) return {0.0, true};
    return {accept_from_log_ratio(log_ratio), false};
  } catch (const std::domain_error&) {
    return {0.0, true};
  }
}

MalaKernel::MalaKernel(const SystemModel& model, double dt)
    : model_(model), dt_(dt), noise_(std::sqrt(2.0 * dt / model.beta())) {
  if (!(dt > 0.0)) throw std::invalid_argument("mala: time step must be positive");
}

StepOutcome MalaKernel::step(MicroState& x, RngStream& rng) {
  const std::size_t d = model_.dim();
  if (!x.potential || x.gradient.size() != d) {
    x.gradient.resize(d);
    x.potential = model_.potential_and_gradient(x.coords, x.gradient);
  }
  StepOutcome out;
  out.micro_proposed = true;

  proposal_.coords.resize(d);
  proposal_.gradient.resize(d);
  proposal_.reaction_coordinate.reset();
  for (std::size_t i = 0; i < d; ++i) {
    proposal_.coords[i] = x.coords[i] - dt_ * x.gradient[i] + noise_ * rng.normal();
  }
  const double u = rng.uniform();

  double v_new = 0.0;
  bool ok = model_.in_domain(proposal_.coords);
  if (ok) {
    try {
      v_new = model_.potential_and_gradient(proposal_.coords, proposal_.gradient);
    } catch (const std::domain_error&) {
      ok = false;
    }
  }
  if (ok && std::isfinite(v_new)) {
    double fwd = 0.0;
    double rev = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double f = proposal_.coords[i] - x.coords[i] + dt_ * x.gradient[i];
      const double r = x.coords[i] - proposal_.coords[i] + dt_ * proposal_.gradient[i];
      fwd += f * f;
      rev += r * r;
    }
    const double beta = model_.beta();
    const double log_ratio = -beta * (v_new - *x.potential) - beta * (rev - fwd) / (4.0 * dt_);
    ok = std::isfinite(log_ratio);
    if (ok) {
      out.micro_alpha = accept_from_log_ratio(log_ratio);
      if (u < out.micro_alpha) {
        proposal_.potential = v_new;
        std::swap(x, proposal_);
        out.micro_accepted = true;
      }
    }
  }
  if (!ok) {
    out.nonfinite = true;
    out.micro_alpha = 0.0;
  }
  return out;
}

MmKernel::MmKernel(const SystemModel& model, const MacroModel& macro, MacroProposalKernel kernel,
                   const ReconstructionSampler& recon)
    : model_(model), macro_(macro), kernel_(kernel), recon_(recon) {
  if (!(kernel.dt > 0.0)) throw std::invalid_argument("mm: macroscopic time step must be positive");
  if (kernel.kind == ProposalKind::Effective && kernel.table == nullptr) {
    throw std::invalid_argument("mm: effective proposal requires a coefficient table");
  }
}

void MmKernel::restrict_current(const MicroState& x) {
  Terms t;
  t.z = model_.rc_value(x);
  if (!macro_.domain().contains(t.z)) {
    throw DomainError("mm: reaction coordinate of the current state lies outside the macro domain");
  }
  t.log_mu = gibbs_log_density(model_, x);
  t.log_mu0 = macro_.log_density(t.z);
  t.log_nu = recon_.log_density(x, t.z);
  current_ = t;
  cached_coords_ = x.coords;
}

StepOutcome MmKernel::step(MicroState& x, RngStream& rng) {
  if (cached_coords_ != x.coords) restrict_current(x);
  StepOutcome out;
  out.macro_proposed = true;

  const auto fwd = transition(kernel_, macro_, current_.z);
  if (!fwd) throw std::out_of_range("macro proposal from outside the coefficient table");
  const double eta = rng.normal();
  const double z_new = fwd->mean + std::sqrt(fwd->variance) * eta;
  double alpha_cg = 0.0;
  double log_mu0_new = 0.0;
  if (macro_.domain().contains(z_new)) {
    if (const auto rev = transition(kernel_, macro_, z_new)) {
      const double d = current_.z - rev->mean;
      double log_q = -d * d / (2.0 * rev->variance) + 0.5 * eta * eta;
      if (rev->variance != fwd->variance) log_q += 0.5 * std::log(fwd->variance / rev->variance);
      log_mu0_new = macro_.log_density(z_new);
      alpha_cg = accept_from_log_ratio(log_mu0_new - current_.log_mu0 + log_q);
    }
  }
  if (!(alpha_cg >= 1.0 || rng.uniform() < alpha_cg)) return out;
  out.macro_accepted = true;
  out.micro_proposed = true;

  recon_.sample(z_new, rng, proposal_);

  Terms next;
  double v_new = 0.0;
  bool ok = model_.in_domain(proposal_.coords);
  if (ok) {
    try {
      next.z = model_.reaction_coordinate().scalar(proposal_.coords);
      v_new = model_.potential(proposal_.coords);
      next.log_mu = -model_.beta() * v_new;
      next.log_mu0 = next.z == z_new ? log_mu0_new : macro_.log_density(next.z);
      next.log_nu = recon_.log_density(proposal_, next.z);
    } catch (const std::exception&) {
      ok = false;
    }
  }
  const double log_ratio = (next.log_mu - current_.log_mu) + (current_.log_mu0 - next.log_mu0) +
                           (current_.log_nu - next.log_nu);
  if (!ok || !std::isfinite(log_ratio)) {
    out.nonfinite = true;
    out.micro_alpha = 0.0;
    return out;
  }
  out.micro_alpha = accept_from_log_ratio(log_ratio);
  if (out.micro_alpha >= 1.0 || rng.uniform() < out.micro_alpha) {
    std::swap(x, proposal_);
    x.potential = v_new;
    x.gradient.clear();
    x.reaction_coordinate = next.z;
    current_ = next;
    cached_coords_ = x.coords;
    out.micro_accepted = true;
  }
  return out;
}

StepOutcome mala_step(const SystemModel& model, MicroState& x, double dt, RngStream& rng) {
  MalaKernel kernel(model, dt);
  return kernel.step(x, rng);
}

StepOutcome mm_step(const SystemModel& model, const MacroModel& macro,
                    const MacroProposalKernel& kernel, const ReconstructionSampler& recon,
                    MicroState& x, RngStream& rng) {
  MmKernel mm(model, macro, kernel, recon);
  return mm.step(x, rng);
}

Observable rc_observable(const SystemModel& model) {
  return [&model](const MicroState& x) { return model.rc_value(x); };
}

}  // namespace mmmc
