#pragma once

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include "neu/types.hpp"

namespace neu::harness {

struct BcaSpec {
  double level = 0.95;
  int resamples = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(level > 0.0 && level < 1.0)) throw ConfigurationError("BcaSpec: level must lie in (0, 1)");
    if (resamples < 100) throw ConfigurationError("BcaSpec: need at least 100 resamples");
  }
};

struct Interval {
  double low = 0.0, mean = 0.0, high = 0.0;
};

/// Sorted means of `resamples` bootstrap resamples drawn from mt19937_64(seed).
inline std::vector<double> bootstrap_means(const std::vector<double>& samples, int resamples, std::uint64_t seed) {
  const std::size_t n = samples.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(resamples);
  for (int b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += samples[pick(rng)];
    means[b] = s / double(n);
  }
  std::sort(means.begin(), means.end());
  return means;
}

/// Order statistic of a sorted sample at quantile q (smallest k with k/B >= q).
inline double order_statistic(const std::vector<double>& sorted, double q) {
  const auto b = static_cast<long>(sorted.size());
  const long k = std::clamp(static_cast<long>(std::ceil(q * double(b))) - 1, 0L, b - 1);
  return sorted[k];
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

}  // namespace detail

/// Bias correction z0 and acceleration a of a BCa interval, with the sorted
/// bootstrap means they were computed from.
struct BcaParts {
  std::vector<double> boot;
  double mean = 0.0;
  double z0 = 0.0;
  double a = 0.0;
};

inline BcaParts bca_parts(const std::vector<double>& samples, const BcaSpec& spec) {
  BcaParts p;
  p.mean = detail::mean_of(samples);
  p.boot = bootstrap_means(samples, spec.resamples, spec.seed);
  const boost::math::normal_distribution<double> normal;
  const auto below = std::lower_bound(p.boot.begin(), p.boot.end(), p.mean) - p.boot.begin();
  const double b = double(p.boot.size());
  p.z0 = boost::math::quantile(normal, std::clamp(double(below) / b, 0.5 / b, 1.0 - 0.5 / b));

  // jackknife: leave-one-out means are (sum - x_i) / (n - 1)
  const double n = double(samples.size());
  std::vector<double> loo(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) loo[i] = (p.mean * n - samples[i]) / (n - 1.0);
  const double loo_mean = detail::mean_of(loo);
  double num = 0.0, den = 0.0;
  for (double v : loo) {
    const double d = loo_mean - v;
    num += d * d * d;
    den += d * d;
  }
  p.a = den > 0.0 ? num / (6.0 * std::pow(den, 1.5)) : 0.0;
  return p;
}

/// Endpoints at the BCa-adjusted quantiles Phi(z0 + (z0 + z) / (1 - a (z0 + z))).
/// With z0 = a = 0 these are the plain percentile endpoints.
inline std::pair<double, double> bca_endpoints(const std::vector<double>& sorted_boot, double z0, double a,
                                               double level) {
  const boost::math::normal_distribution<double> normal;
  auto adjusted = [&](double alpha) {
    const double z = boost::math::quantile(normal, alpha);
    return boost::math::cdf(normal, z0 + (z0 + z) / (1.0 - a * (z0 + z)));
  };
  const double tail = 0.5 * (1.0 - level);
  return {order_statistic(sorted_boot, adjusted(tail)), order_statistic(sorted_boot, adjusted(1.0 - tail))};
}

/// Bias-corrected and accelerated bootstrap interval for the mean.
inline Interval bca_interval(const std::vector<double>& samples, const BcaSpec& spec = {}) {
  spec.validate();
  if (samples.size() < 10) throw DomainError("bca_interval: need at least 10 samples");
  for (double x : samples)
    if (!std::isfinite(x)) throw DomainError("bca_interval: samples must be finite");
  Interval out;
  if (std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples.front(); })) {
    out.low = out.high = out.mean = samples.front();
    return out;
  }
  const BcaParts p = bca_parts(samples, spec);
  out.mean = p.mean;
  std::tie(out.low, out.high) = bca_endpoints(p.boot, p.z0, p.a, spec.level);
  return out;
}

}  // namespace neu::harness
