#pragma once

// Distribution summaries and the statistical validation toolkit: Hoeffding
// bound, BCa bootstrap confidence intervals, Wilcoxon signed-rank test and
// Cliff's delta effect size.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "veritrans/errors.hpp"

namespace veritrans::stats {

// ---------------------------------------------------------------------------
// Normal distribution helpers

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Acklam's rational approximation with one Halley refinement step.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw RangeError("normal_quantile requires p in (0, 1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  static constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

// ---------------------------------------------------------------------------
// Basic statistics

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Lower median for even n: the element at index (n-1)/2 of the sorted data.
inline double lower_median(std::vector<double> v) {
  if (v.empty()) throw EmptyInputError("median of empty sample");
  const std::size_t k = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

// ---------------------------------------------------------------------------
// Hoeffding bound

// Two-sided Hoeffding bound for bounded i.i.d. variables:
// 2 * exp(-2 n eps^2 / width^2).
inline double hoeffding_bound(std::size_t n, double range_width, double epsilon) {
  if (n < 1) throw RangeError("hoeffding_bound requires n >= 1");
  if (!(range_width > 0.0)) throw RangeError("hoeffding_bound requires range_width > 0");
  if (!(epsilon > 0.0)) throw RangeError("hoeffding_bound requires epsilon > 0");
  const double w = epsilon / range_width;
  return 2.0 * std::exp(-2.0 * static_cast<double>(n) * w * w);
}

// ---------------------------------------------------------------------------
// BCa bootstrap

enum class Statistic { Mean, Median };

inline double evaluate_statistic(Statistic stat, const std::vector<double>& v) {
  return stat == Statistic::Mean ? mean(v) : lower_median(v);
}

// Resample index stream contract (also honored by the test oracles and any
// parallel driver): resample b draws n indices from
// mt19937_64(seed + 0x9E3779B97F4A7C15 * (b + 1)) reduced by % n.
inline std::vector<std::size_t> bootstrap_indices(std::uint64_t seed, std::size_t b, std::size_t n) {
  std::mt19937_64 eng(seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(b) + 1));
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(eng() % n);
  return idx;
}

// Bias-corrected accelerated interval. Degenerate all-equal samples collapse
// to the point estimate (returned, not thrown); fewer than two samples is an
// error.
inline std::pair<double, double> bootstrap_ci_bca(const std::vector<double>& samples, Statistic stat,
                                                  std::size_t resamples, double confidence, std::uint64_t seed) {
  const std::size_t n = samples.size();
  if (n < 2) throw DegenerateSampleError("BCa bootstrap requires at least two samples");
  if (resamples < 1000) throw RangeError("BCa bootstrap requires at least 1000 resamples");
  if (!(confidence > 0.0 && confidence < 1.0)) throw RangeError("confidence must lie in (0, 1)");

  const double point = evaluate_statistic(stat, samples);
  if (std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples[0]; })) {
    return {point, point};
  }

  std::vector<double> boot(resamples);
  std::vector<double> scratch(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    const auto idx = bootstrap_indices(seed, b, n);
    for (std::size_t i = 0; i < n; ++i) scratch[i] = samples[idx[i]];
    boot[b] = evaluate_statistic(stat, scratch);
  }
  std::sort(boot.begin(), boot.end());

  // Bias correction from the proportion of resample statistics below the
  // point estimate.
  std::size_t below = 0;
  for (double x : boot)
    if (x < point) ++below;
  double p0 = static_cast<double>(below) / static_cast<double>(resamples);
  const double clip = 1.0 / (2.0 * static_cast<double>(resamples));
  p0 = std::clamp(p0, clip, 1.0 - clip);
  const double z0 = normal_quantile(p0);

  // Acceleration from jackknife skewness.
  std::vector<double> jack(n);
  std::vector<double> loo(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) loo[k++] = samples[j];
    jack[i] = evaluate_statistic(stat, loo);
  }
  const double jack_mean = mean(jack);
  double num = 0.0, den = 0.0;
  for (double x : jack) {
    const double d = jack_mean - x;
    num += d * d * d;
    den += d * d;
  }
  const double accel = den == 0.0 ? 0.0 : num / (6.0 * std::pow(den, 1.5));

  auto endpoint = [&](double alpha) {
    const double z = z0 + normal_quantile(alpha);
    const double adjusted = normal_cdf(z0 + z / (1.0 - accel * z));
    const double pos = std::clamp(adjusted, 0.0, 1.0) * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= resamples) return boot.back();
    return boot[lo] + frac * (boot[lo + 1] - boot[lo]);
  };

  const double alpha = (1.0 - confidence) / 2.0;
  return {endpoint(alpha), endpoint(1.0 - alpha)};
}

// ---------------------------------------------------------------------------
// Distribution summary

struct DistributionSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  // tau -> (count of scores >= tau, count / n)
  std::map<double, std::pair<std::size_t, double>> mass_at_tau;
};

struct SummarizeOptions {
  std::size_t resamples = 10000;
  double confidence = 0.95;
  std::uint64_t seed = 42;
};

inline DistributionSummary summarize(const std::vector<double>& scores, const std::vector<double>& taus,
                                     const SummarizeOptions& options = {}) {
  if (scores.empty()) throw EmptyInputError("summarize requires at least one score");
  DistributionSummary s;
  s.n = scores.size();
  s.mean = mean(scores);
  s.median = lower_median(scores);
  if (scores.size() >= 2) {
    std::tie(s.ci95_low, s.ci95_high) =
        bootstrap_ci_bca(scores, Statistic::Mean, options.resamples, options.confidence, options.seed);
  } else {
    s.ci95_low = s.ci95_high = s.mean;
  }
  for (double tau : taus) {
    std::size_t count = 0;
    for (double x : scores)
      if (x >= tau) ++count;
    s.mass_at_tau[tau] = {count, static_cast<double>(count) / static_cast<double>(s.n)};
  }
  return s;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test

struct WilcoxonResult {
  double w = 0.0;          // min of the signed-rank sums
  double p_value = 1.0;    // two-sided
  double median_delta = 0.0;
  bool exact = false;      // true when the 2^m enumeration path was used
};

// Paired two-sided test. Zero differences are dropped; ties in |d| receive
// average ranks. Exact distribution (over all 2^m sign patterns) when m <= 12,
// otherwise the normal approximation with tie-corrected variance and a
// continuity correction.
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& paired_a,
                                           const std::vector<double>& paired_b) {
  if (paired_a.size() != paired_b.size()) {
    throw InsufficientDataError("paired samples must have equal lengths");
  }
  std::vector<double> diffs(paired_a.size());
  for (std::size_t i = 0; i < paired_a.size(); ++i) diffs[i] = paired_a[i] - paired_b[i];

  std::vector<double> nonzero;
  for (double d : diffs)
    if (d != 0.0) nonzero.push_back(d);
  const std::size_t m = nonzero.size();
  if (m < 5) {
    throw InsufficientDataError("need at least 5 non-zero differences, got " + std::to_string(m));
  }

  // Rank |d| ascending with average ranks on ties; doubled ranks stay integral.
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(nonzero[x]) < std::abs(nonzero[y]);
  });
  std::vector<long> rank2(m, 0);  // 2 * rank
  std::vector<std::size_t> tie_sizes;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && std::abs(nonzero[order[j + 1]]) == std::abs(nonzero[order[i]])) ++j;
    const long doubled = static_cast<long>(i + 1 + j + 1);  // first rank + last rank
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = doubled;
    if (j > i) tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }

  long w_plus2 = 0, total2 = 0;
  for (std::size_t k = 0; k < m; ++k) {
    total2 += rank2[k];
    if (nonzero[k] > 0.0) w_plus2 += rank2[k];
  }
  const long w_min2 = std::min(w_plus2, total2 - w_plus2);

  WilcoxonResult result;
  result.w = static_cast<double>(w_min2) / 2.0;
  result.median_delta = lower_median(diffs);

  if (m <= 12) {
    // Exact: distribution of the doubled positive-rank sum over all sign
    // patterns, by subset-sum counting.
    result.exact = true;
    std::vector<std::uint64_t> dist(static_cast<std::size_t>(total2) + 1, 0);
    dist[0] = 1;
    for (std::size_t k = 0; k < m; ++k) {
      const auto r = static_cast<std::size_t>(rank2[k]);
      for (std::size_t s = dist.size() - 1; s >= r; --s) dist[s] += dist[s - r];
    }
    std::uint64_t hits = 0;
    for (std::size_t s = 0; s < dist.size(); ++s) {
      const auto sum = static_cast<long>(s);
      if (sum <= w_min2 || sum >= total2 - w_min2) hits += dist[s];
    }
    result.p_value = static_cast<double>(hits) / std::pow(2.0, static_cast<double>(m));
  } else {
    const double dm = static_cast<double>(m);
    const double mu = dm * (dm + 1.0) / 4.0;
    double variance = dm * (dm + 1.0) * (2.0 * dm + 1.0) / 24.0;
    for (std::size_t t : tie_sizes) {
      const double dt = static_cast<double>(t);
      variance -= (dt * dt * dt - dt) / 48.0;
    }
    const double w = static_cast<double>(w_min2) / 2.0;
    const double z = (w - mu + 0.5) / std::sqrt(variance);
    result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Cliff's delta

// (#{a_i > b_j} - #{a_i < b_j}) / (|a| * |b|), direct pair counting.
inline double cliffs_delta(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw EmptyInputError("cliffs_delta requires non-empty samples");
  long greater = 0, less = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) ++greater;
      else if (x < y) ++less;
    }
  }
  return static_cast<double>(greater - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace veritrans::stats
