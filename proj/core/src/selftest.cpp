#include "mmmc/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mmmc/diagnostics.hpp"
#include "mmmc/effective.hpp"
#include "mmmc/models.hpp"
#include "mmmc/samplers.hpp"

namespace mmmc {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

/// Largest violation of the Metropolis-Hastings pair identity: one of the two
/// probabilities is 1 and the other equals exp(-|R|).
double pair_violation(double forward, double backward, double log_ratio) {
  if (std::max(forward, backward) != 1.0) return INFINITY;
  if (std::abs(log_ratio) > 700.0) return 0.0;
  const double expected = std::exp(-std::abs(log_ratio));
  const double smaller = log_ratio < 0.0 ? forward : backward;
  return std::abs(smaller - expected) / expected;
}

SelftestCheck check_macro_ratio(const SelftestOptions& o) {
  const auto macro = make_three_atom_macro(three_atom::FreeEnergy::A3, 1.0);
  RngStream rng(o.seed, 1);
  double worst = 0.0;
  std::size_t tested = 0;
  for (ProposalKind kind : {ProposalKind::Langevin, ProposalKind::Brownian}) {
    const MacroProposalKernel k{kind, 0.01, nullptr};
    for (std::size_t i = 0; i < o.random_pairs; ++i) {
      const double a = 0.05 + (std::numbers::pi - 0.1) * rng.uniform();
      const double b = a + 0.3 * rng.normal();
      if (!macro->domain().contains(b)) continue;
      const double q_ab = macro_log_q(k, *macro, b, a);
      const double q_ba = macro_log_q(k, *macro, a, b);
      const double fwd = macro_accept_prob(*macro, a, b, q_ab, q_ba);
      const double bwd = macro_accept_prob(*macro, b, a, q_ba, q_ab);
      const double r = -(macro->free_energy(b) - macro->free_energy(a)) + q_ba - q_ab;
      worst = std::max(worst, pair_violation(fwd, bwd, r));
      ++tested;
    }
  }
  return {"mh_identity_macro", worst < 1e-12,
          std::to_string(tested) + " pairs, max relative violation " + fmt(worst)};
}

SelftestCheck check_micro_ratio(const SelftestOptions& o) {
  const double eps = 1e-2;
  const ThreeAtomModel model(eps, 1.0);
  const auto macro = make_three_atom_macro(three_atom::FreeEnergy::A2, 1.0);
  const ThreeAtomReconstruction recon(three_atom::Reconstruction::Nu1, eps, 1.0);
  RngStream rng(o.seed, 2);
  MicroState a, b;
  double worst = 0.0;
  for (std::size_t i = 0; i < o.random_pairs; ++i) {
    recon.sample(0.2 + (std::numbers::pi - 0.4) * rng.uniform(), rng, a);
    recon.sample(0.2 + (std::numbers::pi - 0.4) * rng.uniform(), rng, b);
    const double za = model.rc_value(a);
    const double zb = model.rc_value(b);
    const double fwd = micro_accept_prob(model, *macro, recon, a, b).prob;
    const double bwd = micro_accept_prob(model, *macro, recon, b, a).prob;
    const double r = gibbs_log_density(model, b) + macro->log_density(za) + recon.log_density(a, za) -
                     gibbs_log_density(model, a) - macro->log_density(zb) - recon.log_density(b, zb);
    worst = std::max(worst, pair_violation(fwd, bwd, r));
  }
  return {"mh_identity_micro", worst < 1e-12,
          std::to_string(o.random_pairs) + " pairs, max relative violation " + fmt(worst)};
}

SelftestCheck check_gradients(const SelftestOptions& o) {
  RngStream rng(o.seed, 3);
  double worst = 0.0;
  std::string where;
  auto record = [&](double err, const SystemModel& m) {
    if (err > worst) {
      worst = err;
      where = std::string(m.name());
    }
  };
  MicroState x;
  for (double eps : {1e-4, 1e-6}) {
    const ThreeAtomModel m(eps, 1.0);
    const double s = std::sqrt(eps);
    for (std::size_t i = 0; i < o.gradient_points; ++i) {
      const double theta = 0.05 + (std::numbers::pi - 0.1) * rng.uniform();
      const double r = 1.0 + 3.0 * s * rng.normal();
      x = MicroState(Vector{1.0 + 3.0 * s * rng.normal(), r * std::cos(theta), r * std::sin(theta)});
      record(gradient_check(m, x, 1e-6), m);
      // Jacobian of the reaction coordinate against differences of its value.
      Vector jac(3), probe = x.coords;
      m.reaction_coordinate().jacobian(x.coords, jac);
      for (std::size_t k = 0; k < 3; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(x.coords[k]));
        probe[k] = x.coords[k] + h;
        const double plus = m.reaction_coordinate().scalar(probe);
        probe[k] = x.coords[k] - h;
        const double minus = m.reaction_coordinate().scalar(probe);
        probe[k] = x.coords[k];
        record(std::abs(jac[k] - (plus - minus) / (2.0 * h)) / std::max(1.0, std::abs(jac[k])), m);
      }
    }
  }
  {
    const ButaneModel m(1e-2);
    const ButaneReconstruction recon(1e-2);
    for (std::size_t i = 0; i < o.gradient_points; ++i) {
      recon.sample(std::numbers::pi * (2.0 * rng.uniform() - 1.0), rng, x);
      record(gradient_check(m, x, 1e-6), m);
    }
  }
  {
    const SyntheticToyModel m(1e-3, 1.0);
    for (std::size_t i = 0; i < o.gradient_points; ++i) {
      const double x1 = 4.0 * rng.uniform() - 2.0;
      x = MicroState(Vector{x1, x1 + 0.1 * rng.normal()});
      record(gradient_check(m, x, 1e-6), m);
    }
  }
  return {"gradient_checks", worst < 1e-5,
          "max relative error " + fmt(worst) + (where.empty() ? "" : " (" + where + ")")};
}

SelftestCheck check_toy_stationarity(const SelftestOptions& o) {
  const double eps = 1e-3;
  const SyntheticToyModel model(eps, 1.0);
  const auto macro = make_toy_macro(1.0);
  const ToyReconstruction recon(eps, 1.0);
  MmKernel kernel(model, *macro, {ProposalKind::Langevin, 0.1, nullptr}, recon);
  RngStream rng(o.seed, 4);
  const Interval range{-3.0, 3.0};
  Histogram h(60, range);
  ChainOptions opts;
  opts.record = false;
  opts.on_value = [&h](double v) { h.add(v); };
  const ChainTrace t =
      run_chain(kernel, MicroState(Vector{-1.0, -1.0}), o.toy_steps, rc_observable(model), rng, opts);
  if (!t.valid) return {"toy_stationarity", false, "chain failed: " + t.error};
  const Vector target = density_bin_masses(
      [&](double z) { return macro->log_density(z); }, h.bins(), range);
  const double tv = tv_distance(h.masses(), target);
  return {"toy_stationarity", tv < 0.03,
          "TV " + fmt(tv) + " over " + std::to_string(o.toy_steps) + " steps, micro acceptance " +
              fmt(t.micro_acceptance())};
}

SelftestCheck check_kcorr_ar1(const SelftestOptions& o) {
  RngStream rng(o.seed, 5);
  const double rho = 0.5;
  Vector series(1000000);
  double v = rng.normal();
  for (double& s : series) {
    v = rho * v + std::sqrt(1.0 - rho * rho) * rng.normal();
    s = v;
  }
  const double k = estimate_kcorr(series);
  return {"kcorr_ar1", std::abs(k - 3.0) <= 0.15, "K_corr " + fmt(k) + " (expected 3)"};
}

SelftestCheck check_quadrature(const SelftestOptions&) {
  double worst_three = 0.0;
  {
    const ThreeAtomModel m(1e-4, 1.0);
    const double ref = free_energy_quadrature(m, std::numbers::pi / 2.0 - three_atom::kWellOffset);
    for (int i = 0; i < 200; ++i) {
      const double theta = std::numbers::pi * i / 199.0;
      const double a = free_energy_quadrature(m, theta) - ref;
      worst_three = std::max(
          worst_three, std::abs(a - three_atom::free_energy(three_atom::FreeEnergy::A1, theta)));
    }
  }
  double worst_butane = 0.0;
  {
    const ButaneModel m(1e-2);
    const double ref = free_energy_quadrature(m, 0.0);
    for (int i = 0; i < 100; ++i) {
      const double phi = -std::numbers::pi + 2.0 * std::numbers::pi * (i + 1) / 100.0;
      worst_butane =
          std::max(worst_butane, std::abs(free_energy_quadrature(m, phi) - ref - butane::free_energy(phi)));
    }
  }
  return {"quadrature_free_energy", worst_three < 1e-6 && worst_butane < 1e-6,
          "max error three_atom " + fmt(worst_three) + ", butane " + fmt(worst_butane)};
}

SelftestCheck check_interpolation(const SelftestOptions&) {
  const SyntheticToyModel m(1e-3, 1.0);
  QuadratureSpec quad;
  quad.nodes = 32;
  const CoefficientTable table = effective_coefficients(m, uniform_grid(m.rc_domain(), 65), quad);
  std::size_t mismatches = 0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const CoefficientSample c = interpolate_table(table, table.grid()[k]);
    mismatches += c.b != table.b()[k] || c.sigma2 != table.sigma2()[k] || c.a != table.a()[k];
  }
  bool rejects_outside = false;
  try {
    interpolate_table(table, table.grid().back() + 1e-9);
  } catch (const std::out_of_range&) {
    rejects_outside = true;
  }
  return {"interpolation_nodes", mismatches == 0 && rejects_outside,
          std::to_string(mismatches) + " node mismatches of " + std::to_string(table.size()) +
              (rejects_outside ? ", extrapolation rejected" : ", extrapolation NOT rejected")};
}

}  // namespace

std::vector<SelftestCheck> run_selftest(const SelftestOptions& options) {
  using Check = SelftestCheck (*)(const SelftestOptions&);
  constexpr Check kChecks[] = {check_macro_ratio,     check_micro_ratio, check_gradients,
                               check_toy_stationarity, check_kcorr_ar1,   check_quadrature,
                               check_interpolation};
  std::vector<SelftestCheck> out;
  for (Check c : kChecks) {
    try {
      out.push_back(c(options));
    } catch (const std::exception& e) {
      out.push_back({"error", false, e.what()});
    }
  }
  return out;
}

}  // namespace mmmc
