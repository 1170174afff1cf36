#include "mmmc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "mmmc/models.hpp"

namespace mmmc {

ConfigError::ConfigError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ThreeAtom: return "three_atom";
    case ModelKind::Butane: return "butane";
    case ModelKind::Toy: return "toy";
  }
  return "unknown";
}

std::string_view to_string(SamplerKind kind) {
  return kind == SamplerKind::Mala ? "mala" : "mm";
}

namespace {

constexpr const char* kKeys[] = {
    "model",          "epsilon",        "beta",           "sampler",       "free_energy",
    "proposal",       "reconstruction", "dt_micro",       "dt_macro",      "n_steps",
    "n_replicas",     "base_seed",      "observable",     "output_dir",    "thin",
    "write_traces",   "histogram_bins", "histogram_lo",   "histogram_hi",  "kcorr_burn_in",
    "initial_state",  "table_file",     "table_nodes",    "quadrature_nodes",
};

struct Entry {
  std::string value;
  std::size_t line;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Entries {
 public:
  explicit Entries(std::map<std::string, Entry> map) : map_(std::move(map)) {}

  const Entry* find(const std::string& key) const {
    const auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }

  std::string text(const std::string& key, std::string fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
  }

  double real(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    return e ? parse_real(*e, key) : fallback;
  }

  double positive(const std::string& key, double fallback) const {
    const double v = real(key, fallback);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc() && ptr == last) return v;
    // Accept integral values written in floating-point notation, e.g. 1e6.
    const double d = parse_real(*e, key);
    if (d < 0.0 || d > 9007199254740992.0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      fail(key, "must be a non-negative integer, got '" + e->value + "'");
    }
    return static_cast<std::uint64_t>(d);
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t min) const {
    const std::uint64_t v = integer(key, fallback);
    if (v < min) fail(key, "must be at least " + std::to_string(min));
    return v;
  }

  bool boolean(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    fail(key, "must be true or false, got '" + e->value + "'");
  }

  Vector reals(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return {};
    std::string s = e->value;
    for (char& c : s) {
      if (c == ',') c = ' ';
    }
    std::istringstream in(s);
    Vector out;
    std::string token;
    while (in >> token) out.push_back(parse_real(Entry{token, e->line}, key));
    if (out.empty()) fail(key, "expects a list of numbers");
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const Entry* e = find(key);
    throw ConfigError(key + " " + what, e ? e->line : 0);
  }

 private:
  static double parse_real(const Entry& e, const std::string& key) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw ConfigError(key + " must be a finite number, got '" + e.value + "'", e.line);
    }
    return v;
  }

  std::map<std::string, Entry> map_;
};

std::map<std::string, Entry> read_entries(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(std::string_view(raw).substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError("unknown key '" + key + "'", line_no);
    }
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    const auto [it, inserted] = entries.emplace(key, Entry{value, line_no});
    if (!inserted) {
      throw ConfigError("duplicate key '" + key + "' (first set on line " +
                            std::to_string(it->second.line) + ")",
                        line_no);
    }
  }
  return entries;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  const Entries e(read_entries(in));
  ExperimentConfig c;

  if (!e.find("model")) throw ConfigError("missing required key 'model'");
  const std::string model = e.text("model", "");
  if (model == "three_atom") {
    c.model = ModelKind::ThreeAtom;
  } else if (model == "butane") {
    c.model = ModelKind::Butane;
  } else if (model == "toy") {
    c.model = ModelKind::Toy;
  } else {
    e.fail("model", "must be one of three_atom, butane, toy; got '" + model + "'");
  }

  if (!e.find("sampler")) throw ConfigError("missing required key 'sampler'");
  const std::string sampler = e.text("sampler", "");
  if (sampler == "mala") {
    c.sampler = SamplerKind::Mala;
  } else if (sampler == "mm") {
    c.sampler = SamplerKind::Mm;
  } else {
    e.fail("sampler", "must be mala or mm; got '" + sampler + "'");
  }

  switch (c.model) {
    case ModelKind::ThreeAtom:
      c.epsilon = e.positive("epsilon", 1e-6);
      c.beta = e.positive("beta", 1.0);
      c.dt_micro = e.positive("dt_micro", *c.epsilon);
      c.dt_macro = e.positive("dt_macro", 0.01);
      c.free_energy = e.text("free_energy", "A1");
      c.reconstruction = e.text("reconstruction", "nu1");
      c.histogram_range = {0.0, std::numbers::pi};
      c.initial_state = {1.0, 0.0, 1.0};
      break;
    case ModelKind::Butane:
      if (e.find("epsilon")) e.fail("epsilon", "does not apply to butane");
      c.beta = e.positive("beta", 1e-2);
      c.dt_micro = e.positive("dt_micro", 1e-6);
      c.dt_macro = e.positive("dt_macro", 5e-4);
      c.free_energy = e.text("free_energy", "exact");
      c.reconstruction = e.text("reconstruction", "exact");
      c.histogram_range = {-std::numbers::pi, std::numbers::pi};
      c.initial_state = ButaneModel::equilibrium(0.0);
      break;
    case ModelKind::Toy:
      c.epsilon = e.positive("epsilon", 1e-3);
      c.beta = e.positive("beta", 1.0);
      c.dt_micro = e.positive("dt_micro", *c.epsilon);
      c.dt_macro = e.positive("dt_macro", 0.1);
      c.free_energy = e.text("free_energy", "exact");
      c.reconstruction = e.text("reconstruction", "exact");
      c.histogram_range = {-3.0, 3.0};
      c.initial_state = {-1.0, -1.0};
      break;
  }

  const bool three_atom = c.model == ModelKind::ThreeAtom;
  const bool fe_ok = c.free_energy == "table" ||
                     (three_atom ? (c.free_energy == "A1" || c.free_energy == "A2" || c.free_energy == "A3")
                                 : c.free_energy == "exact");
  if (!fe_ok) {
    e.fail("free_energy", three_atom ? "must be A1, A2, A3 or table for three_atom"
                                     : "must be exact or table for " + model);
  }
  const bool recon_ok = three_atom ? (c.reconstruction == "nu1" || c.reconstruction == "nu2")
                                   : c.reconstruction == "exact";
  if (!recon_ok) {
    e.fail("reconstruction", three_atom ? "must be nu1 or nu2 for three_atom"
                                        : "must be exact for " + model);
  }

  const std::string proposal = e.text("proposal", "langevin");
  if (proposal == "langevin") {
    c.proposal = ProposalKind::Langevin;
  } else if (proposal == "brownian") {
    c.proposal = ProposalKind::Brownian;
  } else if (proposal == "effective") {
    c.proposal = ProposalKind::Effective;
  } else {
    e.fail("proposal", "must be langevin, brownian or effective; got '" + proposal + "'");
  }

  c.n_steps = e.count("n_steps", c.n_steps, 1);
  c.n_replicas = e.count("n_replicas", c.n_replicas, 1);
  c.base_seed = e.integer("base_seed", c.base_seed);
  c.observable = e.text("observable", c.observable);
  if (c.observable != "rc_value") e.fail("observable", "must be rc_value");
  c.output_dir = e.text("output_dir", c.output_dir.string());
  c.thin = e.count("thin", c.thin, 1);
  c.write_traces = e.boolean("write_traces", c.write_traces);
  c.histogram_bins = e.count("histogram_bins", c.histogram_bins, 1);
  c.histogram_range.lo = e.real("histogram_lo", c.histogram_range.lo);
  c.histogram_range.hi = e.real("histogram_hi", c.histogram_range.hi);
  if (!(c.histogram_range.hi > c.histogram_range.lo)) {
    e.fail(e.find("histogram_hi") ? "histogram_hi" : "histogram_lo",
           "gives an empty histogram range");
  }
  c.kcorr_burn_in = e.integer("kcorr_burn_in", c.kcorr_burn_in);
  if (c.kcorr_burn_in >= c.n_steps) e.fail("kcorr_burn_in", "must be smaller than n_steps");
  if (e.find("initial_state")) {
    c.initial_state = e.reals("initial_state");
    if (c.initial_state.size() != (c.model == ModelKind::ThreeAtom ? 3u : c.model == ModelKind::Butane ? 6u : 2u)) {
      e.fail("initial_state", "has the wrong number of coordinates for " + model);
    }
  }
  if (const Entry* t = e.find("table_file")) {
    std::filesystem::path p = t->value;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.table_file = p;
  }
  c.table_nodes = e.count("table_nodes", c.table_nodes, 2);
  c.quadrature_nodes = e.count("quadrature_nodes", c.quadrature_nodes, 2);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_config(in, path.parent_path());
  } catch (const ConfigError& err) {
    throw ConfigError(path.string() + ": " + err.what(), err.line());
  }
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  char buf[64];
  auto real = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "model = " << to_string(c.model) << '\n';
  if (c.epsilon) out << "epsilon = " << real(*c.epsilon) << '\n';
  out << "beta = " << real(c.beta) << '\n';
  out << "sampler = " << to_string(c.sampler) << '\n';
  out << "free_energy = " << c.free_energy << '\n';
  out << "proposal = " << to_string(c.proposal) << '\n';
  out << "reconstruction = " << c.reconstruction << '\n';
  out << "dt_micro = " << real(c.dt_micro) << '\n';
  out << "dt_macro = " << real(c.dt_macro) << '\n';
  out << "n_steps = " << c.n_steps << '\n';
  out << "n_replicas = " << c.n_replicas << '\n';
  out << "base_seed = " << c.base_seed << '\n';
  out << "observable = " << c.observable << '\n';
  out << "thin = " << c.thin << '\n';
  out << "write_traces = " << (c.write_traces ? "true" : "false") << '\n';
  out << "histogram_bins = " << c.histogram_bins << '\n';
  out << "histogram_lo = " << real(c.histogram_range.lo) << '\n';
  out << "histogram_hi = " << real(c.histogram_range.hi) << '\n';
  out << "kcorr_burn_in = " << c.kcorr_burn_in << '\n';
  out << "initial_state = ";
  for (std::size_t i = 0; i < c.initial_state.size(); ++i) {
    out << (i ? ", " : "") << real(c.initial_state[i]);
  }
  out << '\n';
  if (c.table_file) out << "table_file = " << c.table_file->string() << '\n';
  out << "table_nodes = " << c.table_nodes << '\n';
  out << "quadrature_nodes = " << c.quadrature_nodes << '\n';
  return out.str();
}

}  // namespace mmmc
