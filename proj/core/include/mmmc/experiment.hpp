#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mmmc/config.hpp"
#include "mmmc/diagnostics.hpp"
#include "mmmc/effective.hpp"
#include "mmmc/macro.hpp"
#include "mmmc/samplers.hpp"

namespace mmmc {

/// Everything a chain needs, built once per ensemble and shared read-only by
/// all replicas.
struct ExperimentSetup {
  std::unique_ptr<SystemModel> model;
  std::unique_ptr<MacroModel> macro;
  std::unique_ptr<ReconstructionSampler> recon;
  std::optional<CoefficientTable> table;
  MicroState initial;
};

/// Throws ConfigError for inconsistent settings (e.g. an initial state outside
/// the model domain).
ExperimentSetup build_setup(const ExperimentConfig& config, unsigned threads = 1);
std::unique_ptr<ChainKernel> make_kernel(const ExperimentSetup& setup,
                                         const ExperimentConfig& config);

struct EnsembleOptions {
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;
  /// Keep per-replica recorded traces in the result.
  bool keep_traces = false;
  bool compute_kcorr = true;
  /// Called after each finished replica with the number finished so far.
  std::function<void(std::size_t)> progress;
};

struct ReplicaResult {
  ChainTrace trace;  // recorded series dropped unless keep_traces
  double mean = 0.0;
  std::optional<KcorrEstimate> kcorr;
};

struct EnsembleResult {
  ExperimentConfig config;
  std::vector<ReplicaResult> replicas;
  Histogram histogram;

  std::uint64_t macro_proposed = 0;
  std::uint64_t macro_accepted = 0;
  std::uint64_t micro_proposed = 0;
  std::uint64_t micro_accepted = 0;
  std::uint64_t nonfinite = 0;
  double min_micro_alpha = 1.0;
  double max_micro_alpha_deviation = 0.0;
  /// Sum of per-chain sampling-loop times (seconds).
  double wall_time = 0.0;
  /// Elapsed time of the whole ensemble including parallelism (seconds).
  double elapsed_time = 0.0;

  double macro_acceptance() const;
  double micro_acceptance() const;
  Vector replica_means() const;
  /// Requires at least two replicas.
  double variance() const;
  double mean() const;
};

/// Runs config.n_replicas chains; replica r uses RngStream(base_seed, r).
/// Results do not depend on the thread count. Throws std::runtime_error if a
/// chain fails.
EnsembleResult run_ensemble(const ExperimentConfig& config, const EnsembleOptions& options = {});

class OutputTransaction;

/// Writes trace_<r>.csv (when the traces were kept and config.write_traces),
/// histogram.csv and summary.txt into `dir`.
void write_ensemble(const EnsembleResult& result, const std::filesystem::path& dir,
                    OutputTransaction* tx = nullptr);

/// Throws ConfigError when the two configs differ in a shared field.
void check_comparable(const ExperimentConfig& micro, const ExperimentConfig& mm);
GainReport compare_ensembles(const EnsembleResult& micro, const EnsembleResult& mm);
void write_gain_report(const GainReport& report, const std::filesystem::path& path,
                       OutputTransaction* tx = nullptr);

/// Removes every file and directory created through it unless `commit()` is
/// called; used to leave no partial outputs behind on failure.
class OutputTransaction {
 public:
  OutputTransaction() = default;
  ~OutputTransaction();
  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;

  /// Creates `dir` (and parents) and records the ones that did not exist.
  void create_directories(const std::filesystem::path& dir);
  /// Records a file about to be written.
  void track(const std::filesystem::path& file);
  void commit() noexcept { committed_ = true; }

 private:
  std::vector<std::filesystem::path> created_dirs_;
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

/// `run`: ensemble plus outputs in config.output_dir.
EnsembleResult run_experiment(const ExperimentConfig& config, const EnsembleOptions& options = {});
/// `compare`: both ensembles into out/micro and out/mm plus out/gain_report.txt.
GainReport run_comparison(const ExperimentConfig& micro, const ExperimentConfig& mm,
                          const std::filesystem::path& out, const EnsembleOptions& options = {});
/// `coeffs`: effective coefficient table of the config's model on
/// table_nodes points of its reaction-coordinate domain, written to `path`.
CoefficientTable run_coefficients(const ExperimentConfig& config, const std::filesystem::path& path,
                                  unsigned threads = 1);

}  // namespace mmmc
