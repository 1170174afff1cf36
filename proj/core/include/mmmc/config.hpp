#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "mmmc/samplers.hpp"
#include "mmmc/system.hpp"

namespace mmmc {

/// Invalid experiment configuration. `line()` is 0 when the problem is not
/// tied to a single line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class ModelKind { ThreeAtom, Butane, Toy };
enum class SamplerKind { Mala, Mm };

std::string_view to_string(ModelKind kind);
std::string_view to_string(SamplerKind kind);

struct ExperimentConfig {
  ModelKind model = ModelKind::ThreeAtom;
  std::optional<double> epsilon;  // three_atom and toy only
  double beta = 1.0;

  SamplerKind sampler = SamplerKind::Mm;
  std::string free_energy;     // A1 | A2 | A3 | exact | table
  ProposalKind proposal = ProposalKind::Langevin;
  std::string reconstruction;  // nu1 | nu2 | exact
  double dt_micro = 0.0;
  double dt_macro = 0.0;

  std::uint64_t n_steps = 1000000;
  std::uint64_t n_replicas = 100;
  std::uint64_t base_seed = 1;
  std::string observable = "rc_value";
  std::filesystem::path output_dir = "mmmc_out";

  std::size_t thin = 1;
  bool write_traces = true;
  std::size_t histogram_bins = 100;
  Interval histogram_range;
  std::size_t kcorr_burn_in = 0;
  Vector initial_state;

  /// Coefficient table for free_energy = table or proposal = effective;
  /// computed by quadrature when unset.
  std::optional<std::filesystem::path> table_file;
  std::size_t table_nodes = 512;
  std::size_t quadrature_nodes = 64;
};

/// Parses flat `key = value` text with `#` comments. Unknown keys, repeated
/// keys and invalid values raise ConfigError with the line number. Unset keys
/// take per-model defaults; relative table paths resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` rendering of every field.
std::string format_config(const ExperimentConfig& config);

}  // namespace mmmc
