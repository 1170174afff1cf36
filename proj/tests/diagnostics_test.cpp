#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mmmc/diagnostics.hpp"
#include "mmmc/rng.hpp"

namespace mmmc {
namespace {

Vector ar1(double rho, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Vector out(n);
  double v = rng.normal();
  for (double& s : out) {
    v = rho * v + std::sqrt(1.0 - rho * rho) * rng.normal();
    s = v;
  }
  return out;
}

TEST(Kcorr, IidIsOne) {
  RngStream rng(1, 0);
  Vector x(1000000);
  for (double& v : x) v = rng.normal();
  EXPECT_NEAR(estimate_kcorr(x), 1.0, 0.05);
}

TEST(Kcorr, Ar1Oracle) {
  EXPECT_NEAR(estimate_kcorr(ar1(0.5, 1000000, 2)), 3.0, 0.15);
}

TEST(Kcorr, Ar1BruteForceCrossCheck) {
  // variance of block means of length 1000 is K / 1000
  const Vector x = ar1(0.5, 1000000, 3);
  const std::size_t block = 1000;
  Vector means;
  for (std::size_t b = 0; b < x.size() / block; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < block; ++i) s += x[b * block + i];
    means.push_back(s / block);
  }
  EXPECT_NEAR(replicate_variance(means) * block, estimate_kcorr(x), 0.4);
}

TEST(Kcorr, AlternatingSeriesBelowOne) {
  Vector x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const double k = estimate_kcorr(x);
  EXPECT_LT(k, 1.0);
  EXPECT_GE(k, 1e-3);
}

TEST(Kcorr, AffineInvariant) {
  const Vector x = ar1(0.7, 20000, 4);
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -3.5 * x[i] + 12.0;
  EXPECT_NEAR(estimate_kcorr(x), estimate_kcorr(y), 1e-9);
}

TEST(Kcorr, Errors) {
  EXPECT_THROW(estimate_kcorr(Vector(99, 0.5)), std::invalid_argument);
  EXPECT_THROW(estimate_kcorr(Vector(1000, 0.5)), std::domain_error);
  KcorrOptions o;
  o.burn_in = 950;
  EXPECT_THROW(estimate_kcorr(ar1(0.5, 1000, 5), o), std::invalid_argument);
}

TEST(Kcorr, WindowRule) {
  const KcorrEstimate e = estimate_kcorr_detailed(ar1(0.5, 100000, 6));
  EXPECT_TRUE(e.window_converged);
  EXPECT_GE(static_cast<double>(e.window), 5.0 * e.kcorr);
}

TEST(Autocorrelation, Ar1Lags) {
  const Vector rho = autocorrelation(ar1(0.5, 1000000, 7), 3);
  EXPECT_DOUBLE_EQ(rho[0], 1.0);
  EXPECT_NEAR(rho[1], 0.5, 0.01);
  EXPECT_NEAR(rho[2], 0.25, 0.01);
}

TEST(ReplicateVariance, HandComputable) {
  EXPECT_EQ(replicate_variance(Vector{0.0, 2.0}), 2.0);
  EXPECT_EQ(replicate_variance(Vector{1.5, 1.5, 1.5}), 0.0);
  EXPECT_THROW(replicate_variance(Vector{1.0}), std::invalid_argument);
  EXPECT_EQ(sample_mean(Vector{1.0, 2.0, 6.0}), 3.0);
}

TEST(ReplicateVariance, MeansOfIidNormals) {
  RngStream rng(8, 0);
  Vector means(100);
  for (double& m : means) {
    double s = 0.0;
    for (int i = 0; i < 10000; ++i) s += rng.normal();
    m = s / 10000;
  }
  EXPECT_NEAR(replicate_variance(means) / 1e-4, 1.0, 0.3);
}

TEST(EfficiencyGain, PublishedRows) {
  const GainReport r = efficiency_gain(3297.65, 1.0, 2.50343, 1.0);
  EXPECT_NEAR(r.total_gain, 8255.4, 0.1);
  const GainReport b = efficiency_gain(0.0817, 0.00564, 5503.0, 279.0);
  EXPECT_NEAR(b.total_gain, 285.7, 0.1);
  EXPECT_LT(303.95 / b.total_gain, 1.5);
}

TEST(EfficiencyGain, IdenticalIsOneAndProductIsExact) {
  const GainReport r = efficiency_gain(0.3, 0.3, 12.0, 12.0);
  EXPECT_EQ(r.total_gain, 1.0);
  const GainReport s = efficiency_gain(0.37, 0.011, 13.1, 4.7);
  EXPECT_EQ(s.total_gain, s.variance_gain * s.runtime_gain);
  EXPECT_EQ(s.variance_gain, 0.37 / 0.011);
  EXPECT_EQ(s.runtime_gain, 13.1 / 4.7);
}

TEST(EfficiencyGain, NonPositiveInputRejected) {
  EXPECT_THROW(efficiency_gain(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(efficiency_gain(1.0, -1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(efficiency_gain(1.0, 1.0, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(efficiency_gain(NAN, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Histogram, SingleValue) {
  const Histogram h = histogram(Vector{0.3}, 1, {0.0, 1.0});
  EXPECT_EQ(h.masses(), (Vector{1.0}));
}

TEST(Histogram, UniformDraws) {
  RngStream rng(9, 0);
  Histogram h(10, {-2.0, 3.0});
  for (int i = 0; i < 1000000; ++i) h.add(-2.0 + 5.0 * rng.uniform());
  for (double m : h.masses()) EXPECT_NEAR(m, 0.1, 0.002);
  EXPECT_EQ(h.in_range(), 1000000u);
}

TEST(Histogram, OutOfRangeCounted) {
  Histogram h(4, {0.0, 1.0});
  h.add(Vector{-0.5, 0.0, 0.25, 0.999, 1.0, 1.5, NAN});
  EXPECT_EQ(h.underflow(), 1u);
  EXPECT_EQ(h.overflow(), 2u);
  EXPECT_EQ(h.in_range(), 4u);
  EXPECT_EQ(h.counts(), (std::vector<std::uint64_t>{1, 1, 0, 2}));
  EXPECT_EQ(h.bin_lo(1), 0.25);
  EXPECT_EQ(h.bin_hi(1), 0.5);
}

TEST(Histogram, MergeMatchesSingle) {
  RngStream rng(10, 0);
  Vector x(1000);
  for (double& v : x) v = rng.normal();
  Histogram a(20, {-3.0, 3.0}), b(20, {-3.0, 3.0});
  a.add(std::span<const double>(x).first(400));
  b.add(std::span<const double>(x).subspan(400));
  a.merge(b);
  const Histogram whole = histogram(x, 20, {-3.0, 3.0});
  EXPECT_EQ(a.counts(), whole.counts());
  EXPECT_EQ(a.total(), whole.total());
  EXPECT_THROW(a.merge(Histogram(21, {-3.0, 3.0})), std::invalid_argument);
}

TEST(TvDistance, Basics) {
  const Vector a = {0.5, 0.5, 0.0}, b = {0.0, 0.0, 1.0}, c = {0.2, 0.3, 0.5};
  EXPECT_EQ(tv_distance(a, a), 0.0);
  EXPECT_EQ(tv_distance(a, b), 1.0);
  EXPECT_THROW(tv_distance(a, Vector{0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(tv_distance(a, Vector{0.5, 0.4, 0.0}), std::invalid_argument);
  EXPECT_NEAR(tv_distance(a, c), 0.5, 1e-15);
}

TEST(TvDistance, MetricOnRandomTriples) {
  RngStream rng(11, 0);
  auto draw = [&rng]() {
    Vector v(8);
    double s = 0.0;
    for (double& x : v) s += (x = rng.uniform());
    for (double& x : v) x /= s;
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    const Vector p = draw(), q = draw(), r = draw();
    EXPECT_EQ(tv_distance(p, q), tv_distance(q, p));
    EXPECT_LE(tv_distance(p, r), tv_distance(p, q) + tv_distance(q, r) + 1e-15);
  }
}

TEST(DensityBinMasses, StandardNormal) {
  const Vector m = density_bin_masses([](double z) { return -0.5 * z * z; }, 2, {-1.0, 1.0});
  EXPECT_NEAR(m[0], 0.5, 1e-14);
  EXPECT_NEAR(m[0] + m[1], 1.0, 1e-14);
  const Vector w = density_bin_masses([](double z) { return -0.5 * z * z; }, 3, {-1.0, 1.0});
  // P(|Z| < 1/3) / P(|Z| < 1)
  EXPECT_NEAR(w[1], std::erf(1.0 / 3.0 / std::sqrt(2.0)) / std::erf(1.0 / std::sqrt(2.0)), 1e-12);
}

}  // namespace
}  // namespace mmmc
