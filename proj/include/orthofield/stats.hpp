#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace orthofield {

struct EmptySample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Neumaier-compensated accumulator; adding the same values in the same
/// order reproduces the same double bit for bit.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;  // sample variance, n-1 denominator
  std::size_t count = 0;
  double std_error() const {
    return count > 1 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
  }
};

inline MeanVariance mean_variance(const std::vector<double>& xs) {
  MeanVariance mv;
  mv.count = xs.size();
  if (xs.empty()) return mv;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  mv.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum q;
    for (double x : xs) q.add((x - mv.mean) * (x - mv.mean));
    mv.variance = q.value() / static_cast<double>(xs.size() - 1);
  }
  return mv;
}

inline double sample_covariance(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("sample_covariance: size mismatch or empty");
  const double mx = mean_variance(xs).mean;
  const double my = mean_variance(ys).mean;
  CompensatedSum s;
  for (std::size_t i = 0; i < xs.size(); ++i) s.add((xs[i] - mx) * (ys[i] - my));
  return s.value() / static_cast<double>(xs.size() - 1);
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * 1.4142135623730950488));
}

/// Exact sup-distance between the empirical cdf of the sample and a target
/// cdf, via the sorted-sample formula.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw EmptySample("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    const double above = (static_cast<double>(i) + 1.0) / n - f;
    const double below = f - static_cast<double>(i) / n;
    dist = std::max(dist, std::max(above, below));
  }
  return dist;
}

/// Two-sample sup-distance between empirical cdfs.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw EmptySample("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double dist = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    dist = std::max(dist, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return dist;
}

/// Asymptotic Kolmogorov law K(x) = P(sup |B(t)| <= x) for the Brownian
/// bridge. Alternating series for large x, theta-transformed series for
/// small x.
inline double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.18) {
    const double pi = 3.141592653589793238462643;
    const double t = std::exp(-pi * pi / (8.0 * x * x));
    const double sum = t + std::pow(t, 9.0) + std::pow(t, 25.0) + std::pow(t, 49.0);
    return std::sqrt(2.0 * pi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= 32; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * sum;
}

/// Upper quantile: smallest c with K(c) >= 1 - alpha. The pass threshold for
/// a KS test with R samples is then c / sqrt(R).
inline double kolmogorov_quantile(double one_minus_alpha) {
  if (!(one_minus_alpha > 0.0 && one_minus_alpha < 1.0))
    throw std::invalid_argument("kolmogorov_quantile: level must be in (0,1)");
  double lo = 0.01, hi = 4.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_cdf(mid) < one_minus_alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace orthofield
