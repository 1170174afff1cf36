#include "mmmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include <fftw3.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mmmc {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t fft_length(std::size_t n) {
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  return len;
}

}  // namespace

Vector autocorrelation(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("autocorrelation: need at least two samples");
  max_lag = std::min(max_lag, n - 1);
  const double mean = sample_mean(series);
  const std::size_t len = fft_length(n);

  double* buf = fftw_alloc_real(len);
  fftw_complex* spec = fftw_alloc_complex(len / 2 + 1);
  fftw_plan forward, backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(len), buf, spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(len), spec, buf, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) buf[i] = series[i] - mean;
  std::fill(buf + n, buf + len, 0.0);
  fftw_execute(forward);
  for (std::size_t k = 0; k < len / 2 + 1; ++k) {
    spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    spec[k][1] = 0.0;
  }
  fftw_execute(backward);

  Vector rho(max_lag + 1);
  const double c0 = buf[0];
  for (std::size_t t = 0; t <= max_lag; ++t) rho[t] = buf[t] / c0;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(buf);
  fftw_free(spec);
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    throw std::domain_error("autocorrelation: series has zero or non-finite variance");
  }
  return rho;
}

KcorrEstimate estimate_kcorr_detailed(std::span<const double> series, const KcorrOptions& options) {
  if (options.burn_in >= series.size()) {
    throw std::invalid_argument("estimate_kcorr: burn-in discards the whole series");
  }
  series = series.subspan(options.burn_in);
  if (series.size() < 100) throw std::invalid_argument("estimate_kcorr: need at least 100 samples");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw std::domain_error("estimate_kcorr: constant series");

  const Vector rho = autocorrelation(series, series.size() - 1);
  KcorrEstimate est;
  double k = 1.0;
  std::size_t w = 1;
  for (; w < rho.size(); ++w) {
    k += 2.0 * rho[w];
    if (static_cast<double>(w) >= options.window_factor * k) break;
  }
  if (w == rho.size()) {
    w = rho.size() - 1;
    est.window_converged = false;
  }
  est.window = w;
  est.kcorr = std::max(k, options.floor);
  return est;
}

double estimate_kcorr(std::span<const double> series, const KcorrOptions& options) {
  return estimate_kcorr_detailed(series, options).kcorr;
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sequence");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double replicate_variance(std::span<const double> replicate_means) {
  const std::size_t n = replicate_means.size();
  if (n < 2) throw std::invalid_argument("replicate_variance: need at least two replicas");
  const double m = sample_mean(replicate_means);
  double ss = 0.0;
  for (double v : replicate_means) ss += (v - m) * (v - m);
  return ss / static_cast<double>(n - 1);
}

GainReport efficiency_gain(double var_micro, double var_mm, double t_micro, double t_mm) {
  if (!(var_micro > 0.0) || !(var_mm > 0.0) || !(t_micro > 0.0) || !(t_mm > 0.0)) {
    throw std::invalid_argument("efficiency_gain: variances and times must be positive");
  }
  GainReport r;
  r.var_micro = var_micro;
  r.var_mm = var_mm;
  r.t_micro = t_micro;
  r.t_mm = t_mm;
  r.variance_gain = var_micro / var_mm;
  r.runtime_gain = t_micro / t_mm;
  r.total_gain = r.variance_gain * r.runtime_gain;
  return r;
}

Histogram::Histogram(std::size_t bins, Interval range)
    : range_(range), inv_width_(0.0), counts_(bins, 0) {
  if (bins == 0) throw std::invalid_argument("histogram: need at least one bin");
  if (!(range.hi > range.lo) || !std::isfinite(range.lo) || !std::isfinite(range.hi)) {
    throw std::invalid_argument("histogram: degenerate range");
  }
  inv_width_ = static_cast<double>(bins) / range.width();
}

void Histogram::add(double value) noexcept {
  if (value < range_.lo) {
    ++underflow_;
  } else if (value <= range_.hi) {
    auto i = static_cast<std::size_t>((value - range_.lo) * inv_width_);
    ++counts_[std::min(i, counts_.size() - 1)];
    ++in_range_;
  } else {
    ++overflow_;  // also NaN
  }
}

void Histogram::add(std::span<const double> values) noexcept {
  for (double v : values) add(v);
}

void Histogram::merge(const Histogram& other) {
  if (other.bins() != bins() || other.range_.lo != range_.lo || other.range_.hi != range_.hi) {
    throw std::invalid_argument("histogram: merging incompatible histograms");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  underflow_ += other.underflow_;
  overflow_ += other.overflow_;
  in_range_ += other.in_range_;
}

double Histogram::bin_lo(std::size_t i) const noexcept {
  return range_.lo + range_.width() * static_cast<double>(i) / static_cast<double>(bins());
}

double Histogram::bin_hi(std::size_t i) const noexcept {
  return i + 1 == bins() ? range_.hi : bin_lo(i + 1);
}

Vector Histogram::masses() const {
  Vector m(counts_.size(), 0.0);
  if (in_range_ == 0) return m;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    m[i] = static_cast<double>(counts_[i]) / static_cast<double>(in_range_);
  }
  return m;
}

Histogram histogram(std::span<const double> series, std::size_t bins, Interval range) {
  Histogram h(bins, range);
  h.add(series);
  return h;
}

double tv_distance(std::span<const double> h1, std::span<const double> h2) {
  if (h1.size() != h2.size()) throw std::invalid_argument("tv_distance: mass vectors differ in length");
  double s1 = 0.0, s2 = 0.0, d = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i) {
    s1 += h1[i];
    s2 += h2[i];
    d += std::abs(h1[i] - h2[i]);
  }
  if (std::abs(s1 - 1.0) > 1e-12 || std::abs(s2 - 1.0) > 1e-12) {
    throw std::invalid_argument("tv_distance: mass vectors must sum to one");
  }
  return 0.5 * d;
}

Vector density_bin_masses(const std::function<double(double)>& log_density, std::size_t bins,
                          Interval range) {
  const Histogram layout(bins, range);
  double peak = -INFINITY;
  for (std::size_t i = 0; i <= 20 * bins; ++i) {
    peak = std::max(peak, log_density(range.lo + range.width() * static_cast<double>(i) /
                                                     static_cast<double>(20 * bins)));
  }
  Vector m(bins);
  auto f = [&](double z) { return std::exp(log_density(z) - peak); };
  for (std::size_t i = 0; i < bins; ++i) {
    m[i] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, layout.bin_lo(i),
                                                                         layout.bin_hi(i), 10, 1e-13);
  }
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::domain_error("density_bin_masses: density does not integrate to a positive value");
  }
  for (double& v : m) v /= total;
  return m;
}

}  // namespace mmmc
