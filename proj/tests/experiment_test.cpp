#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mmmc/experiment.hpp"

namespace mmmc {
namespace {

namespace fs = std::filesystem;

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mmmc_experiment_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string read_without_timing(const fs::path& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("wall_time", 0) == 0 || line.rfind("elapsed_time", 0) == 0 ||
        line.rfind("t_micro", 0) == 0 || line.rfind("t_mm", 0) == 0 ||
        line.rfind("runtime_gain", 0) == 0 || line.rfind("total_gain", 0) == 0) {
      continue;
    }
    out += line + "\n";
  }
  return out;
}

std::vector<fs::path> listing(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  }
  std::sort(files.begin(), files.end());
  return files;
}

TEST(Ensemble, ToyExactReconstruction) {
  ExperimentConfig c = parse("model = toy\nsampler = mm\nn_steps = 1e5\nn_replicas = 4\n");
  const EnsembleResult r = run_ensemble(c, {.threads = 2});
  EXPECT_EQ(r.micro_acceptance(), 1.0);
  EXPECT_EQ(r.macro_proposed, 400000u);
  EXPECT_EQ(r.micro_proposed, r.macro_accepted);
  EXPECT_EQ(r.replicas.size(), 4u);
  EXPECT_EQ(r.histogram.total(), 400000u);
  for (const auto& rep : r.replicas) {
    EXPECT_TRUE(rep.trace.valid);
    EXPECT_EQ(rep.trace.n_steps, 100000u);
    ASSERT_TRUE(rep.kcorr);
  }
}

TEST(Ensemble, IndependentOfThreadCount) {
  ExperimentConfig c = parse("model = three_atom\nsampler = mm\nepsilon = 1e-4\nreconstruction = nu2\n"
                             "n_steps = 20000\nn_replicas = 5\n");
  const EnsembleResult a = run_ensemble(c, {.threads = 1});
  const EnsembleResult b = run_ensemble(c, {.threads = 3});
  EXPECT_EQ(a.replica_means(), b.replica_means());
  EXPECT_EQ(a.histogram.counts(), b.histogram.counts());
  EXPECT_EQ(a.micro_accepted, b.micro_accepted);
}

TEST(Ensemble, ReplicasUseDistinctStreams) {
  ExperimentConfig c = parse("model = three_atom\nsampler = mala\nn_steps = 1000\nn_replicas = 3\n");
  const EnsembleResult r = run_ensemble(c, {.threads = 1, .keep_traces = true});
  EXPECT_NE(r.replicas[0].trace.observable, r.replicas[1].trace.observable);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.replicas[i].trace.stream_id, i);
    EXPECT_EQ(r.replicas[i].trace.seed, c.base_seed);
  }
}

TEST(Ensemble, BadInitialStateIsConfigError) {
  ExperimentConfig c = parse("model = three_atom\nsampler = mm\ninitial_state = 1, 0, 0\n");
  EXPECT_THROW(build_setup(c), ConfigError);
  ExperimentConfig d = parse("model = three_atom\nsampler = mm\ninitial_state = 1, 0, -1\n");
  EXPECT_THROW(build_setup(d), ConfigError);
}

TEST(Ensemble, MissingTableIsConfigError) {
  ExperimentConfig c =
      parse("model = three_atom\nsampler = mm\nfree_energy = table\ntable_file = /nonexistent/t.txt\n");
  EXPECT_THROW(build_setup(c), ConfigError);
}

TEST(Outputs, RerunIsByteIdenticalExceptTiming) {
  const fs::path d1 = scratch_dir("rerun1"), d2 = scratch_dir("rerun2");
  ExperimentConfig c = parse("model = three_atom\nsampler = mm\nepsilon = 1e-4\nfree_energy = A2\n"
                             "n_steps = 5000\nn_replicas = 3\nthin = 7\n");
  c.output_dir = d1;
  run_experiment(c, {.threads = 2});
  c.output_dir = d2;
  run_experiment(c, {.threads = 1});
  const auto files = listing(d1);
  EXPECT_EQ(files, listing(d2));
  EXPECT_EQ(files.size(), 5u);
  for (const auto& f : files) {
    EXPECT_EQ(read_without_timing(d1 / f), read_without_timing(d2 / f)) << f;
  }
  std::ifstream trace(d1 / "trace_0.csv");
  std::string header;
  std::getline(trace, header);
  EXPECT_EQ(header, "step,observable,macro_accepted,micro_accepted");
  const std::string summary = read_without_timing(d1 / "summary.txt");
  EXPECT_NE(summary.find("rng = philox4x32-10"), std::string::npos);
  EXPECT_NE(summary.find("[replica_means]"), std::string::npos);
  EXPECT_NE(summary.find("macro_proposed = 15000"), std::string::npos);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Outputs, CompareWritesBothEnsemblesAndReport) {
  const fs::path d1 = scratch_dir("compare1"), d2 = scratch_dir("compare2");
  const ExperimentConfig micro = parse("model = toy\nsampler = mala\nn_steps = 3000\nn_replicas = 3\n");
  const ExperimentConfig mm = parse("model = toy\nsampler = mm\nn_steps = 3000\nn_replicas = 3\n");
  const GainReport g = run_comparison(micro, mm, d1, {.threads = 1});
  run_comparison(micro, mm, d2, {.threads = 2});
  EXPECT_TRUE(fs::exists(d1 / "micro" / "summary.txt"));
  EXPECT_TRUE(fs::exists(d1 / "mm" / "histogram.csv"));
  EXPECT_EQ(read_without_timing(d1 / "gain_report.txt"), read_without_timing(d2 / "gain_report.txt"));
  EXPECT_EQ(g.micro_acc_rate, 1.0);
  EXPECT_EQ(g.total_gain, g.variance_gain * g.runtime_gain);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Outputs, IdenticalConfigsGiveUnitVarianceGain) {
  const ExperimentConfig c = parse("model = toy\nsampler = mm\nn_steps = 2000\nn_replicas = 4\n");
  const EnsembleResult a = run_ensemble(c, {.threads = 1});
  const EnsembleResult b = run_ensemble(c, {.threads = 1});
  EXPECT_EQ(compare_ensembles(a, b).variance_gain, 1.0);
}

TEST(Outputs, ComparabilityChecked) {
  const ExperimentConfig a = parse("model = toy\nsampler = mala\nn_steps = 3000\nn_replicas = 3\n");
  EXPECT_THROW(check_comparable(a, parse("model = toy\nsampler = mm\nn_steps = 3001\nn_replicas = 3\n")),
               ConfigError);
  EXPECT_THROW(check_comparable(a, parse("model = three_atom\nsampler = mm\nn_steps = 3000\nn_replicas = 3\n")),
               ConfigError);
  EXPECT_THROW(check_comparable(a, parse("model = toy\nsampler = mm\nn_steps = 3000\nn_replicas = 3\n"
                                         "base_seed = 2\n")),
               ConfigError);
  const ExperimentConfig one = parse("model = toy\nsampler = mala\nn_steps = 3000\nn_replicas = 1\n");
  EXPECT_THROW(check_comparable(one, one), ConfigError);
  EXPECT_NO_THROW(check_comparable(a, parse("model = toy\nsampler = mm\nn_steps = 3000\nn_replicas = 3\n")));
}

TEST(Outputs, TransactionRollsBack) {
  const fs::path root = scratch_dir("tx");
  {
    OutputTransaction tx;
    tx.create_directories(root / "a" / "b");
    tx.track(root / "a" / "b" / "f.txt");
    std::ofstream(root / "a" / "b" / "f.txt") << "partial";
    EXPECT_TRUE(fs::exists(root / "a" / "b" / "f.txt"));
  }
  EXPECT_FALSE(fs::exists(root));
  {
    OutputTransaction tx;
    tx.create_directories(root);
    tx.track(root / "g.txt");
    std::ofstream(root / "g.txt") << "kept";
    tx.commit();
  }
  EXPECT_TRUE(fs::exists(root / "g.txt"));
  fs::remove_all(root);
}

TEST(Outputs, FailedWriteLeavesNothing) {
  ExperimentConfig c = parse("model = toy\nsampler = mm\nn_steps = 1000\nn_replicas = 2\n");
  c.output_dir = "/dev/null/mmmc_out";
  EXPECT_ANY_THROW(run_experiment(c, {.threads = 1}));
}

TEST(Coefficients, TableFileRoundTrip) {
  const fs::path d = scratch_dir("coeffs");
  ExperimentConfig c = parse("model = toy\nsampler = mm\nproposal = effective\ntable_nodes = 33\n"
                             "quadrature_nodes = 32\n");
  const CoefficientTable t = run_coefficients(c, d / "coefficients.txt", 1);
  EXPECT_EQ(t.size(), 33u);
  const CoefficientTable back = CoefficientTable::read_file(d / "coefficients.txt");
  EXPECT_EQ(back.a(), t.a());
  // the table then drives an effective-proposal ensemble
  c.table_file = d / "coefficients.txt";
  c.n_steps = 20000;
  c.n_replicas = 2;
  const EnsembleResult r = run_ensemble(c, {.threads = 1});
  EXPECT_GT(r.macro_acceptance(), 0.5);
  EXPECT_EQ(r.micro_acceptance(), 1.0);
  fs::remove_all(d);
}

}  // namespace
}  // namespace mmmc
