// mmmc: run micro-macro and MALA ensembles, compare them, tabulate effective
// coefficients and run the invariant suite.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmmc/config.hpp"
#include "mmmc/experiment.hpp"
#include "mmmc/rng.hpp"
#include "mmmc/selftest.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct CommonFlags {
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--threads", f.threads, "worker threads (default: hardware concurrency)");
  cmd->add_option("--seed", f.seed, "base seed, overrides the config");
  cmd->add_option("--out", f.out, "output directory, overrides the config");
}

mmmc::ExperimentConfig load(const std::string& path, const CommonFlags& f) {
  mmmc::ExperimentConfig c = mmmc::load_config(path);
  if (f.seed) c.base_seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  return c;
}

void print_ensemble(const char* label, const mmmc::EnsembleResult& r) {
  std::printf("%s: %s, %llu replicas x %llu steps\n", label,
              std::string(to_string(r.config.sampler)).c_str(),
              static_cast<unsigned long long>(r.config.n_replicas),
              static_cast<unsigned long long>(r.config.n_steps));
  if (r.config.sampler == mmmc::SamplerKind::Mm) {
    std::printf("  macro acceptance  %.6f\n", r.macro_acceptance());
  }
  std::printf("  micro acceptance  %.6f\n", r.micro_acceptance());
  std::printf("  mean              %.10g\n", r.mean());
  if (r.replicas.size() >= 2) std::printf("  replicate var     %.6g\n", r.variance());
  std::printf("  chain time        %.3f s\n", r.wall_time);
}

mmmc::EnsembleOptions ensemble_options(const CommonFlags& f) {
  mmmc::EnsembleOptions o;
  o.threads = f.threads;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"micro-macro Markov chain Monte Carlo experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string config_a, config_b;

  auto* run = app.add_subcommand("run", "run the ensemble described by a config file");
  run->add_option("config", config_a, "experiment config")->required();
  add_common(run, flags);

  auto* compare = app.add_subcommand("compare", "compare a microscopic and a micro-macro ensemble");
  compare->add_option("config_micro", config_a, "reference sampler config")->required();
  compare->add_option("config_mm", config_b, "micro-macro sampler config")->required();
  add_common(compare, flags);

  auto* coeffs = app.add_subcommand("coeffs", "tabulate effective coefficients by quadrature");
  coeffs->add_option("config", config_a, "experiment config")->required();
  add_common(coeffs, flags);

  auto* selftest = app.add_subcommand("selftest", "run the invariant suite");
  add_common(selftest, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed()) {
      const auto config = load(config_a, flags);
      const auto result = mmmc::run_experiment(config, ensemble_options(flags));
      print_ensemble("run", result);
      std::printf("outputs in %s\n", config.output_dir.c_str());
    } else if (compare->parsed()) {
      const auto micro = load(config_a, flags);
      const auto mm = load(config_b, flags);
      const std::filesystem::path out = flags.out ? std::filesystem::path(*flags.out) : mm.output_dir;
      const auto report = mmmc::run_comparison(micro, mm, out, ensemble_options(flags));
      std::printf("macro acceptance     %.6f\n", report.macro_acc_rate);
      std::printf("micro acceptance     %.6f\n", report.micro_acc_rate);
      std::printf("reference acceptance %.6f\n", report.reference_acc_rate);
      std::printf("variance gain        %.6g\n", report.variance_gain);
      std::printf("runtime gain         %.6g\n", report.runtime_gain);
      std::printf("total gain           %.6g\n", report.total_gain);
      std::printf("outputs in %s\n", out.c_str());
    } else if (coeffs->parsed()) {
      const auto config = load(config_a, flags);
      const auto path = config.output_dir / "coefficients.txt";
      const auto table = mmmc::run_coefficients(config, path, flags.threads);
      std::printf("%zu nodes written to %s\n", table.size(), path.c_str());
    } else if (selftest->parsed()) {
      mmmc::SelftestOptions opts;
      if (flags.seed) opts.seed = *flags.seed;
      bool ok = true;
      for (const auto& check : mmmc::run_selftest(opts)) {
        std::printf("%-24s %s  %s\n", check.name.c_str(), check.passed ? "PASS" : "FAIL",
                    check.detail.c_str());
        ok = ok && check.passed;
      }
      return ok ? kOk : kRuntimeError;
    }
  } catch (const mmmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
