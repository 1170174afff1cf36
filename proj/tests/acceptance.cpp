// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 9).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "mmmc/diagnostics.hpp"
#include "mmmc/effective.hpp"
#include "mmmc/experiment.hpp"
#include "mmmc/models.hpp"
#include "mmmc/selftest.hpp"

namespace {

using namespace mmmc;
using std::numbers::pi;

constexpr double kHalfPi = pi / 2.0;

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

class Ensembles {
 public:
  /// Ensemble for the config text; computed once.
  const EnsembleResult& get(const std::string& text) {
    auto it = cache_.find(text);
    if (it != cache_.end()) return it->second;
    std::istringstream in(text);
    const ExperimentConfig c = parse_config(in);
    const auto t0 = std::chrono::steady_clock::now();
    EnsembleOptions opts;
    opts.compute_kcorr = false;
    EnsembleResult r = run_ensemble(c, opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "  [ensemble %s %s eps=%s: %.1f s]\n", std::string(to_string(c.model)).c_str(),
                 std::string(to_string(c.sampler)).c_str(),
                 c.epsilon ? fmt("%g", *c.epsilon).c_str() : "-", secs);
    return cache_.emplace(text, std::move(r)).first->second;
  }

 private:
  std::map<std::string, EnsembleResult> cache_;
};

std::string three_atom(double eps, const std::string& sampler, const std::string& extra = "",
                       std::size_t replicas = 100) {
  return fmt("model = three_atom\nsampler = %s\nepsilon = %.17g\nn_steps = 1000000\nn_replicas = %zu\n",
             sampler.c_str(), eps, replicas) +
         extra;
}

std::string three_atom_mm(double eps, const char* a, const char* nu, const char* proposal = "langevin",
                          std::size_t replicas = 100) {
  return three_atom(eps, "mm",
                    fmt("free_energy = %s\nreconstruction = %s\nproposal = %s\n", a, nu, proposal),
                    replicas);
}

const std::string kButaneMm = "model = butane\nsampler = mm\nn_steps = 1000000\nn_replicas = 100\n";
const std::string kButaneMala = "model = butane\nsampler = mala\nn_steps = 1000000\nn_replicas = 100\n";

struct Outcome {
  bool pass;
  std::string detail;
};

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

Outcome criterion1(Ensembles& e) {
  const auto& t = e.get(three_atom_mm(1e-6, "A1", "nu1"));
  const auto& b = e.get(kButaneMm);
  const bool pass = t.max_micro_alpha_deviation < 1e-10 && b.max_micro_alpha_deviation < 1e-10 &&
                    t.micro_accepted == t.micro_proposed && b.micro_accepted == b.micro_proposed;
  return {pass, fmt("max |alpha_F - 1|: three_atom %.3g over %llu proposals, butane %.3g over %llu proposals",
                    t.max_micro_alpha_deviation, static_cast<unsigned long long>(t.micro_proposed),
                    b.max_micro_alpha_deviation, static_cast<unsigned long long>(b.micro_proposed))};
}

Outcome criterion2(Ensembles& e) {
  const double lang = e.get(three_atom_mm(1e-6, "A1", "nu1")).macro_acceptance();
  const double brown = e.get(three_atom_mm(1e-6, "A1", "nu1", "brownian", 10)).macro_acceptance();
  const double lang2 = e.get(three_atom_mm(1e-6, "A2", "nu1", "langevin", 10)).macro_acceptance();
  const bool pass = in(lang, 0.73, 0.77) && in(brown, 0.62, 0.67) && in(lang2, 0.71, 0.75);
  return {pass, fmt("macro acceptance Langevin-A1 %.5f [0.73,0.77], Brownian-A1 %.5f [0.62,0.67], "
                    "Langevin-A2 %.5f [0.71,0.75]",
                    lang, brown, lang2)};
}

Outcome criterion3(Ensembles& e) {
  const double a2 = e.get(three_atom_mm(1e-6, "A2", "nu1", "langevin", 10)).micro_acceptance();
  const double a3 = e.get(three_atom_mm(1e-6, "A3", "nu1", "langevin", 10)).micro_acceptance();
  const double nu2 = e.get(three_atom_mm(1e-6, "A1", "nu2", "langevin", 10)).micro_acceptance();
  const bool pass = in(a2, 0.40, 0.47) && in(a3, 0.92, 0.98) && in(nu2, 0.44, 0.51);
  return {pass, fmt("micro acceptance (A2,nu1) %.5f [0.40,0.47], (A3,nu1) %.5f [0.92,0.98], "
                    "(A1,nu2) %.5f [0.44,0.51]",
                    a2, a3, nu2)};
}

Outcome criterion4(Ensembles& e) {
  const double macro = e.get(kButaneMm).macro_acceptance();
  const double mala = e.get(kButaneMala).micro_acceptance();
  const bool pass = in(macro, 0.26, 0.32) && in(mala, 0.70, 0.77);
  return {pass, fmt("butane mM macro acceptance %.5f [0.26,0.32], MALA acceptance %.5f [0.70,0.77]", macro, mala)};
}

double mass_where(const Histogram& h, const std::function<bool(double)>& pred) {
  const Vector m = h.masses();
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (pred(0.5 * (h.bin_lo(i) + h.bin_hi(i)))) s += m[i];
  }
  return s;
}

Outcome criterion5(Ensembles& e) {
  const auto& t = e.get(three_atom_mm(1e-6, "A1", "nu1"));
  const ThreeAtomModel model(1e-6, 1.0);
  const double ref = free_energy_quadrature(model, kHalfPi);
  const Vector mu0 = density_bin_masses(
      [&](double z) { return -model.beta() * (free_energy_quadrature(model, z) - ref); }, t.histogram.bins(),
      t.histogram.range());
  const double tv_three = tv_distance(t.histogram.masses(), mu0);
  const double left = mass_where(t.histogram, [](double z) { return z < kHalfPi; });

  const auto& b = e.get(kButaneMm);
  const double beta = 1e-2;
  const Vector torsion = density_bin_masses([&](double phi) { return -beta * butane::free_energy(phi); },
                                            b.histogram.bins(), b.histogram.range());
  const double tv_butane = tv_distance(b.histogram.masses(), torsion);
  const double lobe_minus = mass_where(b.histogram, [](double p) { return p < -pi / 3.0; });
  const double lobe_zero = mass_where(b.histogram, [](double p) { return std::abs(p) <= pi / 3.0; });
  const double lobe_plus = mass_where(b.histogram, [](double p) { return p > pi / 3.0; });
  const bool pass = tv_three < 0.03 && tv_butane < 0.03 && left > 0.0 && left < 1.0 && lobe_minus > 0.0 &&
                    lobe_zero > 0.0 && lobe_plus > 0.0;
  return {pass, fmt("TV three_atom %.4f, butane %.4f (< 0.03); theta mass below pi/2 %.3f; "
                    "phi lobe masses %.3g / %.3g / %.3g",
                    tv_three, tv_butane, left, lobe_minus, lobe_zero, lobe_plus)};
}

Outcome criterion6() {
  const double eps = 1e-6;
  const ThreeAtomModel model(eps, 1.0);
  const MicroState x0(Vector{1.0, 0.0, 1.0});
  const std::uint64_t n = 1000000, skip = 1000;

  struct Sides {
    std::uint64_t left = 0, right = 0, step = 0;
    double at_skip = kHalfPi;
  };
  auto run = [&](ChainKernel& kernel, Sides& s) {
    RngStream rng(1, 0);
    ChainOptions opts;
    opts.record = false;
    opts.on_value = [&s, skip](double theta) {
      if (++s.step == skip) s.at_skip = theta;
      if (s.step <= skip) return;
      (theta < kHalfPi ? s.left : s.right) += 1;
    };
    const ChainTrace t = run_chain(kernel, x0, n, rc_observable(model), rng, opts);
    if (!t.valid) throw std::runtime_error("criterion 6 chain failed: " + t.error);
  };

  Sides mala;
  MalaKernel mala_kernel(model, eps);
  run(mala_kernel, mala);

  Sides mm;
  const auto macro = make_three_atom_macro(three_atom::FreeEnergy::A1, 1.0);
  const ThreeAtomReconstruction recon(three_atom::Reconstruction::Nu1, eps, 1.0);
  MmKernel mm_kernel(model, *macro, {ProposalKind::Langevin, 0.01, nullptr}, recon);
  run(mm_kernel, mm);

  // The well MALA occupies after the first steps must be the only one it visits.
  const std::uint64_t other_side = mala.at_skip < kHalfPi ? mala.right : mala.left;
  const bool pass = other_side == 0 && mm.left > 0 && mm.right > 0;
  return {pass, fmt("MALA after %llu steps: %llu samples theta < pi/2, %llu theta > pi/2 (well at step %llu: %s); "
                    "mM: %llu / %llu",
                    static_cast<unsigned long long>(skip), static_cast<unsigned long long>(mala.left),
                    static_cast<unsigned long long>(mala.right), static_cast<unsigned long long>(skip),
                    mala.at_skip < kHalfPi ? "left" : "right", static_cast<unsigned long long>(mm.left),
                    static_cast<unsigned long long>(mm.right))};
}

GainReport gain(Ensembles& e, double eps, const char* a, const char* nu) {
  return compare_ensembles(e.get(three_atom(eps, "mala")), e.get(three_atom_mm(eps, a, nu)));
}

Outcome criterion7(Ensembles& e) {
  const GainReport g6 = gain(e, 1e-6, "A1", "nu1");
  const GainReport g4 = gain(e, 1e-4, "A1", "nu1");
  const double r6 = g6.variance_gain / 3297.65;
  const double r4 = g4.variance_gain / 85.33;
  const bool var_ok = r6 >= 1.0 / 3.0 && r6 <= 3.0 && r4 >= 1.0 / 3.0 && r4 <= 3.0;
  const bool runtime_ok = g6.runtime_gain > 1.5 && g4.runtime_gain > 1.5;
  return {var_ok && runtime_ok,
          fmt("variance gain eps=1e-6 %.1f (x%.2f of 3297.65), eps=1e-4 %.2f (x%.2f of 85.33); "
              "runtime gain %.3f / %.3f (> 1.5); total gain %.1f / %.2f",
              g6.variance_gain, r6, g4.variance_gain, r4, g6.runtime_gain, g4.runtime_gain, g6.total_gain,
              g4.total_gain)};
}

Outcome criterion8(Ensembles& e) {
  const double eps[] = {1e-3, 1e-4, 1e-5, 1e-6};
  Vector exact, inexact;
  for (double x : eps) {
    exact.push_back(gain(e, x, "A1", "nu1").variance_gain);
    inexact.push_back(gain(e, x, "A2", "nu2").variance_gain);
  }
  bool pass = true;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i > 0 && !(exact[i] > exact[i - 1] && inexact[i] > inexact[i - 1])) pass = false;
    if (!(exact[i] > inexact[i])) pass = false;
  }
  std::string detail = "variance gain (A1,nu1) / (A2,nu2):";
  for (std::size_t i = 0; i < 4; ++i) detail += fmt(" eps=%g %.4g/%.4g", eps[i], exact[i], inexact[i]);
  return {pass, detail};
}

Outcome criterion9() {
  bool pass = true;
  std::string detail;
  for (const SelftestCheck& c : run_selftest()) {
    pass = pass && c.passed;
    if (!detail.empty()) detail += "; ";
    detail += c.name + (c.passed ? " ok" : " FAILED (" + c.detail + ")");
  }
  return {pass, detail};
}

}  // namespace

int main() {
  Ensembles ensembles;
  int failed = 0;
  auto report = [&failed](int id, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& ex) {
      o = {false, std::string("error: ") + ex.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };
  report(9, [] { return criterion9(); });
  report(6, [] { return criterion6(); });
  report(1, [&] { return criterion1(ensembles); });
  report(2, [&] { return criterion2(ensembles); });
  report(3, [&] { return criterion3(ensembles); });
  report(4, [&] { return criterion4(ensembles); });
  report(5, [&] { return criterion5(ensembles); });
  report(7, [&] { return criterion7(ensembles); });
  report(8, [&] { return criterion8(ensembles); });
  std::printf("%d of 9 criteria failed\n", failed);
  return failed;
}
