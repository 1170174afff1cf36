#include "mmmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <thread>

#include "mmmc/models.hpp"

namespace mmmc {

namespace {

std::unique_ptr<SystemModel> make_model(const ExperimentConfig& c) {
  switch (c.model) {
    case ModelKind::ThreeAtom: return std::make_unique<ThreeAtomModel>(*c.epsilon, c.beta);
    case ModelKind::Butane: return std::make_unique<ButaneModel>(c.beta);
    case ModelKind::Toy: return std::make_unique<SyntheticToyModel>(*c.epsilon, c.beta);
  }
  throw ConfigError("unknown model");
}

CoefficientTable compute_table(const SystemModel& model, const ExperimentConfig& c,
                               unsigned threads) {
  QuadratureSpec quad;
  quad.nodes = c.quadrature_nodes;
  return effective_coefficients(model, uniform_grid(model.rc_domain(), c.table_nodes), quad,
                                threads);
}

unsigned resolve_threads(unsigned threads) {
  return threads ? threads : std::max(1u, std::thread::hardware_concurrency());
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_writing(const std::filesystem::path& path, OutputTransaction* tx) {
  if (tx) tx->track(path);
  File f(std::fopen(path.c_str(), "w"));
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return f;
}

void close_checked(File f, const std::filesystem::path& path) {
  const bool bad = std::ferror(f.get()) != 0;
  if (std::fclose(f.release()) != 0 || bad) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

}  // namespace

ExperimentSetup build_setup(const ExperimentConfig& c, unsigned threads) {
  ExperimentSetup s;
  s.model = make_model(c);

  const bool needs_table = c.free_energy == "table" || c.proposal == ProposalKind::Effective;
  if (needs_table) {
    if (c.table_file) {
      try {
        s.table = CoefficientTable::read_file(*c.table_file);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("table_file: ") + e.what());
      }
    } else {
      s.table = compute_table(*s.model, c, resolve_threads(threads));
    }
  }

  switch (c.model) {
    case ModelKind::ThreeAtom: {
      s.recon = std::make_unique<ThreeAtomReconstruction>(
          c.reconstruction == "nu2" ? three_atom::Reconstruction::Nu2 : three_atom::Reconstruction::Nu1,
          *c.epsilon, c.beta);
      if (c.free_energy != "table") {
        const auto variant = c.free_energy == "A2"   ? three_atom::FreeEnergy::A2
                             : c.free_energy == "A3" ? three_atom::FreeEnergy::A3
                                                     : three_atom::FreeEnergy::A1;
        s.macro = make_three_atom_macro(variant, c.beta);
      }
      break;
    }
    case ModelKind::Butane:
      s.recon = std::make_unique<ButaneReconstruction>(c.beta);
      if (c.free_energy != "table") s.macro = make_butane_macro(c.beta);
      break;
    case ModelKind::Toy:
      s.recon = std::make_unique<ToyReconstruction>(*c.epsilon, c.beta);
      if (c.free_energy != "table") s.macro = make_toy_macro(c.beta);
      break;
  }
  if (c.free_energy == "table") {
    try {
      s.macro = std::make_unique<TableMacroModel>(*s.table, c.beta, s.model->rc_domain());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("table_file: ") + e.what());
    }
  }

  s.initial = MicroState(c.initial_state);
  if (!s.model->in_domain(s.initial.coords)) {
    throw ConfigError("initial_state lies outside the domain of " + std::string(s.model->name()));
  }
  if (c.sampler == SamplerKind::Mm && !s.macro->domain().contains(s.model->rc_value(s.initial))) {
    throw ConfigError("initial_state has a reaction coordinate outside the macroscopic domain");
  }
  return s;
}

std::unique_ptr<ChainKernel> make_kernel(const ExperimentSetup& s, const ExperimentConfig& c) {
  if (c.sampler == SamplerKind::Mala) return std::make_unique<MalaKernel>(*s.model, c.dt_micro);
  MacroProposalKernel kernel{c.proposal, c.dt_macro, s.table ? &*s.table : nullptr};
  return std::make_unique<MmKernel>(*s.model, *s.macro, kernel, *s.recon);
}

double EnsembleResult::macro_acceptance() const {
  return macro_proposed ? static_cast<double>(macro_accepted) / static_cast<double>(macro_proposed)
                        : 0.0;
}

double EnsembleResult::micro_acceptance() const {
  return micro_proposed ? static_cast<double>(micro_accepted) / static_cast<double>(micro_proposed)
                        : 0.0;
}

Vector EnsembleResult::replica_means() const {
  Vector m;
  m.reserve(replicas.size());
  for (const auto& r : replicas) m.push_back(r.mean);
  return m;
}

double EnsembleResult::variance() const { return replicate_variance(replica_means()); }

double EnsembleResult::mean() const { return sample_mean(replica_means()); }

EnsembleResult run_ensemble(const ExperimentConfig& config, const EnsembleOptions& options) {
  const unsigned threads = resolve_threads(options.threads);
  const ExperimentSetup setup = build_setup(config, threads);
  const std::size_t n = config.n_replicas;
  const Observable observable = rc_observable(*setup.model);

  std::vector<ReplicaResult> results(n);
  std::vector<Histogram> histograms(n, Histogram(config.histogram_bins, config.histogram_range));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (std::size_t r = next++; r < n; r = next++) {
      try {
        auto kernel = make_kernel(setup, config);
        RngStream rng(config.base_seed, r);
        ChainOptions chain;
        chain.thin = config.thin;
        chain.record = options.keep_traces || options.compute_kcorr;
        Histogram& h = histograms[r];
        chain.on_value = [&h](double v) { h.add(v); };
        ReplicaResult res;
        res.trace = run_chain(*kernel, setup.initial, config.n_steps, observable, rng, chain);
        if (!res.trace.valid) {
          throw std::runtime_error("replica " + std::to_string(r) + " failed after " +
                                   std::to_string(res.trace.n_steps) + " steps: " + res.trace.error);
        }
        res.mean = res.trace.mean();
        if (options.compute_kcorr && res.trace.observable.size() > config.kcorr_burn_in) {
          try {
            KcorrOptions k;
            k.burn_in = config.kcorr_burn_in;
            res.kcorr = estimate_kcorr_detailed(res.trace.observable, k);
          } catch (const std::exception&) {
            // Constant or too short series: K_corr undefined.
          }
        }
        if (!options.keep_traces) {
          res.trace.observable = Vector();
          res.trace.macro_flags = {};
          res.trace.micro_flags = {};
        }
        results[r] = std::move(res);
        const std::size_t done = ++finished;
        if (options.progress) {
          std::lock_guard lock(mutex);
          options.progress(done);
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };

  const auto start = std::chrono::steady_clock::now();
  const unsigned pool_size = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (pool_size <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < pool_size; ++t) pool.emplace_back(worker);
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (failure) std::rethrow_exception(failure);

  EnsembleResult out{config, std::move(results),
                     Histogram(config.histogram_bins, config.histogram_range)};
  for (std::size_t r = 0; r < n; ++r) {
    const ChainTrace& t = out.replicas[r].trace;
    out.histogram.merge(histograms[r]);
    out.macro_proposed += t.macro_proposed;
    out.macro_accepted += t.macro_accepted;
    out.micro_proposed += t.micro_proposed;
    out.micro_accepted += t.micro_accepted;
    out.nonfinite += t.nonfinite;
    out.min_micro_alpha = std::min(out.min_micro_alpha, t.min_micro_alpha);
    out.max_micro_alpha_deviation = std::max(out.max_micro_alpha_deviation, t.max_micro_alpha_deviation);
    out.wall_time += t.wall_time;
  }
  out.elapsed_time = elapsed;
  return out;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_ensemble(const EnsembleResult& result, const std::filesystem::path& dir,
                    OutputTransaction* tx) {
  const ExperimentConfig& c = result.config;
  if (tx) {
    tx->create_directories(dir);
  } else {
    std::filesystem::create_directories(dir);
  }

  if (c.write_traces) {
    for (std::size_t r = 0; r < result.replicas.size(); ++r) {
      const ChainTrace& t = result.replicas[r].trace;
      if (t.observable.empty()) continue;
      const auto path = dir / ("trace_" + std::to_string(r) + ".csv");
      File f = open_for_writing(path, tx);
      std::fputs("step,observable,macro_accepted,micro_accepted\n", f.get());
      for (std::size_t k = 0; k < t.observable.size(); ++k) {
        std::fprintf(f.get(), "%zu,%.17g,%d,%d\n", k * t.thin, t.observable[k], t.macro_flags[k],
                     t.micro_flags[k]);
      }
      close_checked(std::move(f), path);
    }
  }

  {
    const auto path = dir / "histogram.csv";
    File f = open_for_writing(path, tx);
    const Histogram& h = result.histogram;
    const Vector masses = h.masses();
    std::fputs("bin,lo,hi,count,mass\n", f.get());
    for (std::size_t i = 0; i < h.bins(); ++i) {
      std::fprintf(f.get(), "%zu,%.17g,%.17g,%llu,%.17g\n", i, h.bin_lo(i), h.bin_hi(i),
                   static_cast<unsigned long long>(h.counts()[i]), masses[i]);
    }
    close_checked(std::move(f), path);
  }

  {
    const auto path = dir / "summary.txt";
    File f = open_for_writing(path, tx);
    std::string s = format_config(c);
    auto kv = [&s](const std::string& key, const std::string& value) {
      s += key + " = " + value + "\n";
    };
    kv("rng", std::string(kRngAlgorithm));
    kv("kcorr_window_factor", g17(KcorrOptions{}.window_factor));
    kv("macro_proposed", std::to_string(result.macro_proposed));
    kv("macro_accepted", std::to_string(result.macro_accepted));
    kv("micro_proposed", std::to_string(result.micro_proposed));
    kv("micro_accepted", std::to_string(result.micro_accepted));
    kv("nonfinite_rejections", std::to_string(result.nonfinite));
    kv("macro_acc_rate", g17(result.macro_acceptance()));
    kv("micro_acc_rate", g17(result.micro_acceptance()));
    kv("min_micro_alpha", g17(result.min_micro_alpha));
    kv("max_micro_alpha_deviation", g17(result.max_micro_alpha_deviation));
    kv("mean", g17(result.mean()));
    kv("replicate_variance", result.replicas.size() >= 2 ? g17(result.variance()) : "nan");
    kv("histogram_underflow", std::to_string(result.histogram.underflow()));
    kv("histogram_overflow", std::to_string(result.histogram.overflow()));
    kv("wall_time", g17(result.wall_time));
    kv("elapsed_time", g17(result.elapsed_time));
    s += "[replica_means]\n";
    for (std::size_t r = 0; r < result.replicas.size(); ++r) {
      kv(std::to_string(r), g17(result.replicas[r].mean));
    }
    s += "[replica_kcorr]\n";
    for (std::size_t r = 0; r < result.replicas.size(); ++r) {
      const auto& k = result.replicas[r].kcorr;
      kv(std::to_string(r), k ? g17(k->kcorr) : "nan");
    }
    std::fputs(s.c_str(), f.get());
    close_checked(std::move(f), path);
  }
}

void check_comparable(const ExperimentConfig& micro, const ExperimentConfig& mm) {
  auto differs = [](const char* field) {
    throw ConfigError(std::string("compare: '") + field + "' differs between the two configs");
  };
  if (micro.model != mm.model) differs("model");
  if (micro.epsilon != mm.epsilon) differs("epsilon");
  if (micro.beta != mm.beta) differs("beta");
  if (micro.observable != mm.observable) differs("observable");
  if (micro.n_steps != mm.n_steps) differs("n_steps");
  if (micro.n_replicas != mm.n_replicas) differs("n_replicas");
  if (micro.base_seed != mm.base_seed) differs("base_seed");
  if (micro.n_replicas < 2) throw ConfigError("compare: n_replicas must be at least 2");
}

GainReport compare_ensembles(const EnsembleResult& micro, const EnsembleResult& mm) {
  GainReport r = efficiency_gain(micro.variance(), mm.variance(), micro.wall_time, mm.wall_time);
  r.macro_acc_rate = mm.macro_acceptance();
  r.micro_acc_rate = mm.micro_acceptance();
  r.reference_acc_rate = micro.micro_acceptance();
  return r;
}

void write_gain_report(const GainReport& g, const std::filesystem::path& path, OutputTransaction* tx) {
  File f = open_for_writing(path, tx);
  std::string s;
  auto kv = [&s](const char* key, double v) { s += std::string(key) + " = " + g17(v) + "\n"; };
  kv("macro_acc_rate", g.macro_acc_rate);
  kv("micro_acc_rate", g.micro_acc_rate);
  kv("reference_acc_rate", g.reference_acc_rate);
  kv("var_micro", g.var_micro);
  kv("var_mm", g.var_mm);
  kv("variance_gain", g.variance_gain);
  kv("t_micro", g.t_micro);
  kv("t_mm", g.t_mm);
  kv("runtime_gain", g.runtime_gain);
  kv("total_gain", g.total_gain);
  std::fputs(s.c_str(), f.get());
  close_checked(std::move(f), path);
}

OutputTransaction::~OutputTransaction() {
  if (committed_) return;
  std::error_code ec;
  for (auto it = files_.rbegin(); it != files_.rend(); ++it) std::filesystem::remove(*it, ec);
  for (auto it = created_dirs_.rbegin(); it != created_dirs_.rend(); ++it) {
    std::filesystem::remove_all(*it, ec);
  }
}

void OutputTransaction::create_directories(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> missing;
  for (auto p = std::filesystem::absolute(dir); !p.empty() && !std::filesystem::exists(p);
       p = p.parent_path()) {
    missing.push_back(p);
    if (p == p.parent_path()) break;
  }
  std::filesystem::create_directories(dir);
  created_dirs_.insert(created_dirs_.end(), missing.rbegin(), missing.rend());
}

void OutputTransaction::track(const std::filesystem::path& file) { files_.push_back(file); }

EnsembleResult run_experiment(const ExperimentConfig& config, const EnsembleOptions& options) {
  EnsembleOptions opts = options;
  opts.keep_traces = config.write_traces;
  EnsembleResult result = run_ensemble(config, opts);
  OutputTransaction tx;
  write_ensemble(result, config.output_dir, &tx);
  tx.commit();
  return result;
}

GainReport run_comparison(const ExperimentConfig& micro, const ExperimentConfig& mm,
                          const std::filesystem::path& out, const EnsembleOptions& options) {
  check_comparable(micro, mm);
  EnsembleOptions opts = options;
  opts.keep_traces = micro.write_traces;
  const EnsembleResult micro_result = run_ensemble(micro, opts);
  opts.keep_traces = mm.write_traces;
  const EnsembleResult mm_result = run_ensemble(mm, opts);
  const GainReport report = compare_ensembles(micro_result, mm_result);

  OutputTransaction tx;
  tx.create_directories(out);
  write_ensemble(micro_result, out / "micro", &tx);
  write_ensemble(mm_result, out / "mm", &tx);
  write_gain_report(report, out / "gain_report.txt", &tx);
  tx.commit();
  return report;
}

CoefficientTable run_coefficients(const ExperimentConfig& config, const std::filesystem::path& path,
                                  unsigned threads) {
  const auto model = make_model(config);
  CoefficientTable table = compute_table(*model, config, resolve_threads(threads));
  OutputTransaction tx;
  if (path.has_parent_path()) tx.create_directories(path.parent_path());
  tx.track(path);
  table.write_file(path);
  tx.commit();
  return table;
}

}  // namespace mmmc
