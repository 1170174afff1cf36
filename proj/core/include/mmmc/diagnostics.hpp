#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "mmmc/system.hpp"

namespace mmmc {

struct KcorrOptions {
  /// Automatic windowing: smallest W with W >= window_factor * K(W).
  double window_factor = 5.0;
  /// Leading samples discarded before estimation.
  std::size_t burn_in = 0;
  double floor = 1e-3;
};

struct KcorrEstimate {
  double kcorr = 1.0;
  std::size_t window = 0;
  /// False when no window up to n - 1 satisfied the criterion.
  bool window_converged = true;
};

/// Integrated autocorrelation factor K = 1 + 2 sum_{t=1}^{W} rho(t) of the
/// biased sample autocorrelation, computed by FFT. Requires at least 100
/// samples after burn-in and a non-constant series.
KcorrEstimate estimate_kcorr_detailed(std::span<const double> series, const KcorrOptions& options = {});
double estimate_kcorr(std::span<const double> series, const KcorrOptions& options = {});

/// Biased sample autocorrelation rho(0..max_lag).
Vector autocorrelation(std::span<const double> series, std::size_t max_lag);

double sample_mean(std::span<const double> values);
/// Unbiased sample variance of per-replica estimates; at least two needed.
double replicate_variance(std::span<const double> replicate_means);

struct GainReport {
  double macro_acc_rate = 0.0;
  /// Relative to accepted macroscopic proposals.
  double micro_acc_rate = 0.0;
  /// Acceptance rate of the microscopic reference sampler.
  double reference_acc_rate = 0.0;
  double var_micro = 0.0;
  double var_mm = 0.0;
  double t_micro = 0.0;
  double t_mm = 0.0;
  double variance_gain = 0.0;
  double runtime_gain = 0.0;
  double total_gain = 0.0;
};

/// variance_gain = var_micro / var_mm, runtime_gain = t_micro / t_mm and
/// their product. Throws on non-positive input.
GainReport efficiency_gain(double var_micro, double var_mm, double t_micro, double t_mm);

/// Fixed-range histogram; values outside the range (and NaN) land in
/// `underflow`/`overflow`.
class Histogram {
 public:
  Histogram(std::size_t bins, Interval range);

  void add(double value) noexcept;
  void add(std::span<const double> values) noexcept;
  void merge(const Histogram& other);

  std::size_t bins() const noexcept { return counts_.size(); }
  Interval range() const noexcept { return range_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t underflow() const noexcept { return underflow_; }
  std::uint64_t overflow() const noexcept { return overflow_; }
  std::uint64_t in_range() const noexcept { return in_range_; }
  std::uint64_t total() const noexcept { return in_range_ + underflow_ + overflow_; }
  double bin_lo(std::size_t i) const noexcept;
  double bin_hi(std::size_t i) const noexcept;
  /// In-range counts normalized to sum to one.
  Vector masses() const;

 private:
  Interval range_;
  double inv_width_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t underflow_ = 0;
  std::uint64_t overflow_ = 0;
  std::uint64_t in_range_ = 0;
};

Histogram histogram(std::span<const double> series, std::size_t bins, Interval range);

/// Half the l1 distance of two mass vectors. Throws on length mismatch or
/// vectors not summing to one within 1e-12.
double tv_distance(std::span<const double> h1, std::span<const double> h2);

/// Bin masses of the density proportional to exp(log_density) on `bins`
/// equal bins of `range`, by adaptive Gauss-Kronrod per bin.
Vector density_bin_masses(const std::function<double(double)>& log_density, std::size_t bins,
                          Interval range);

}  // namespace mmmc
