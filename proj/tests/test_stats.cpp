#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "veritrans/stats.hpp"

using namespace veritrans;
using namespace veritrans::stats;

namespace {

// Independent percentile-bootstrap oracle. It mirrors the documented
// per-resample index contract (bootstrap_indices) so both sides see the very
// same resample sets; only the interval rule differs.
std::pair<double, double> percentile_oracle(const std::vector<double>& samples, std::size_t resamples,
                                            double confidence, std::uint64_t seed) {
  const std::size_t n = samples.size();
  std::vector<double> boot;
  boot.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    double total = 0.0;
    for (std::size_t idx : bootstrap_indices(seed, b, n)) total += samples[idx];
    boot.push_back(total / static_cast<double>(n));
  }
  std::sort(boot.begin(), boot.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= resamples) return boot.back();
    return boot[lo] + (pos - static_cast<double>(lo)) * (boot[lo + 1] - boot[lo]);
  };
  const double alpha = (1.0 - confidence) / 2.0;
  return {at(alpha), at(1.0 - alpha)};
}

// Brute-force enumeration of all 2^m sign patterns, written apart from the
// implementation's subset-sum counting.
double wilcoxon_enumeration_p(const std::vector<double>& ranks, double w_observed) {
  const std::size_t m = ranks.size();
  const double total = [&] {
    double t = 0.0;
    for (double r : ranks) t += r;
    return t;
  }();
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    double plus = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (std::size_t{1} << i)) plus += ranks[i];
    if (std::min(plus, total - plus) <= w_observed + 1e-12) ++hits;
  }
  return static_cast<double>(hits) / std::pow(2.0, static_cast<double>(m));
}

std::vector<double> average_ranks(std::vector<double> magnitudes) {
  std::vector<std::size_t> order(magnitudes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return magnitudes[a] < magnitudes[b]; });
  std::vector<double> ranks(magnitudes.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && magnitudes[order[j + 1]] == magnitudes[order[i]]) ++j;
    const double avg = static_cast<double>(i + 1 + j + 1) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

TEST_CASE("summarize computes mean, lower median and tau mass") {
  const DistributionSummary both = summarize({100, 100}, {75});
  CHECK(both.n == 2);
  CHECK(both.mean == 100.0);
  CHECK(both.median == 100.0);
  CHECK(both.mass_at_tau.at(75) == std::pair<std::size_t, double>{2, 1.0});

  const DistributionSummary half = summarize({10, 90}, {50});
  CHECK(half.mass_at_tau.at(50) == std::pair<std::size_t, double>{1, 0.5});

  const DistributionSummary even = summarize({1, 2, 3, 4}, {});
  CHECK(even.median == 2.0);  // lower median

  CHECK_THROWS_AS(summarize({}, {75}), EmptyInputError);
}

TEST_CASE("summarize tau mass is non-increasing in tau") {
  std::mt19937_64 rng(501);
  std::vector<double> scores;
  for (int i = 0; i < 200; ++i) scores.push_back(static_cast<double>(rng() % 10000) / 100.0);
  const DistributionSummary s = summarize(scores, {0, 10, 25, 50, 75, 90, 100});
  double previous = 1.1;
  for (const auto& [tau, mass] : s.mass_at_tau) {
    CHECK(mass.second <= previous);
    previous = mass.second;
  }
}

TEST_CASE("hoeffding_bound matches the closed form") {
  const double paper_scale = hoeffding_bound(2100, 100, 5);
  CHECK(paper_scale == Catch::Approx(2.0 * std::exp(-10.5)).margin(1e-12));
  CHECK(paper_scale < 6e-5);
  CHECK(hoeffding_bound(100, 1, 0.1) == Catch::Approx(0.2706705664732254).margin(1e-12));

  // monotone: decreasing in n and epsilon, increasing in range width
  CHECK(hoeffding_bound(200, 1, 0.1) < hoeffding_bound(100, 1, 0.1));
  CHECK(hoeffding_bound(100, 1, 0.2) < hoeffding_bound(100, 1, 0.1));
  CHECK(hoeffding_bound(100, 2, 0.1) > hoeffding_bound(100, 1, 0.1));

  CHECK_THROWS_AS(hoeffding_bound(0, 1, 0.1), RangeError);
  CHECK_THROWS_AS(hoeffding_bound(10, 0, 0.1), RangeError);
  CHECK_THROWS_AS(hoeffding_bound(10, 1, 0), RangeError);
}

TEST_CASE("bootstrap_ci_bca degenerate and error paths") {
  CHECK(bootstrap_ci_bca({5, 5, 5, 5}, Statistic::Mean, 1000, 0.95, 42) == std::pair<double, double>{5, 5});
  CHECK_THROWS_AS(bootstrap_ci_bca({1}, Statistic::Mean, 1000, 0.95, 42), DegenerateSampleError);
  CHECK_THROWS_AS(bootstrap_ci_bca({1, 2, 3}, Statistic::Mean, 10, 0.95, 42), RangeError);
  CHECK_THROWS_AS(bootstrap_ci_bca({1, 2, 3}, Statistic::Mean, 1000, 1.5, 42), RangeError);
}

TEST_CASE("bootstrap_ci_bca is deterministic for a fixed seed") {
  std::vector<double> samples;
  std::mt19937_64 rng(502);
  for (int i = 0; i < 60; ++i) samples.push_back(static_cast<double>(rng() % 1000) / 10.0);
  const auto first = bootstrap_ci_bca(samples, Statistic::Mean, 2000, 0.95, 42);
  const auto second = bootstrap_ci_bca(samples, Statistic::Mean, 2000, 0.95, 42);
  CHECK(first == second);
  const auto other_seed = bootstrap_ci_bca(samples, Statistic::Mean, 2000, 0.95, 43);
  CHECK(first != other_seed);

  const auto median_ci = bootstrap_ci_bca(samples, Statistic::Median, 2000, 0.95, 42);
  CHECK(median_ci.first <= median_ci.second);
}

TEST_CASE("BCa reduces toward the percentile interval on symmetric data") {
  // Symmetric sample set: bias correction and acceleration nearly vanish, so
  // BCa endpoints sit within a pinned tolerance of the oracle's percentile
  // endpoints over the identical resample sets.
  std::vector<double> samples;
  for (int i = 0; i < 40; ++i) {
    const double offset = 0.1 * static_cast<double>(i % 20) + 0.05;
    samples.push_back(offset);
    samples.push_back(-offset);
  }
  const auto bca = bootstrap_ci_bca(samples, Statistic::Mean, 5000, 0.95, 42);
  const auto pct = percentile_oracle(samples, 5000, 0.95, 42);
  CHECK(bca.first == Catch::Approx(pct.first).margin(0.05));
  CHECK(bca.second == Catch::Approx(pct.second).margin(0.05));
}

TEST_CASE("BCa interval width shrinks as n grows at a fixed seed") {
  auto synthetic = [](std::size_t n) {
    std::vector<double> out;
    std::mt19937_64 rng(503);
    for (std::size_t i = 0; i < n; ++i) {
      // sum of twelve uniforms: approximately normal, bounded, deterministic
      double s = 0.0;
      for (int k = 0; k < 12; ++k) s += static_cast<double>(rng() % 10000) / 10000.0;
      out.push_back(s - 6.0);
    }
    return out;
  };
  const auto narrow = bootstrap_ci_bca(synthetic(800), Statistic::Mean, 2000, 0.95, 42);
  const auto wide = bootstrap_ci_bca(synthetic(50), Statistic::Mean, 2000, 0.95, 42);
  CHECK(narrow.second - narrow.first < wide.second - wide.first);
}

TEST_CASE("wilcoxon precondition failures") {
  CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2, 3}, {1, 2}), InsufficientDataError);
  const std::vector<double> same = {1, 2, 3, 4, 5, 6};
  CHECK_THROWS_AS(wilcoxon_signed_rank(same, same), InsufficientDataError);  // all zero differences
  CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2, 3, 4}, {2, 3, 4, 5}), InsufficientDataError);  // m = 4
}

TEST_CASE("wilcoxon exact path matches the enumeration oracle on hand data") {
  // m = 6 with tied magnitudes to exercise average ranks.
  const std::vector<double> a = {1, 2, 3, 4, 5, 6.5};
  const std::vector<double> b = {2, 4, 1, 8, 2, 2};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  REQUIRE(r.exact);

  std::vector<double> magnitudes;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) magnitudes.push_back(std::abs(a[i] - b[i]));
  const std::vector<double> ranks = average_ranks(magnitudes);
  CHECK(r.p_value == Catch::Approx(wilcoxon_enumeration_p(ranks, r.w)).epsilon(0));

  // median of the paired differences, lower-median convention
  CHECK(r.median_delta == -1.0);
}

TEST_CASE("wilcoxon exact path matches enumeration on random small samples") {
  std::mt19937_64 rng(504);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 5 + rng() % 8;  // 5..12
    std::vector<double> a(m), b(m);
    for (std::size_t i = 0; i < m; ++i) {
      a[i] = static_cast<double>(rng() % 20);
      b[i] = static_cast<double>(rng() % 20);
      if (a[i] == b[i]) b[i] += 1.0;
    }
    const WilcoxonResult r = wilcoxon_signed_rank(a, b);
    REQUIRE(r.exact);
    std::vector<double> magnitudes;
    for (std::size_t i = 0; i < m; ++i) magnitudes.push_back(std::abs(a[i] - b[i]));
    const double expected = wilcoxon_enumeration_p(average_ranks(magnitudes), r.w);
    REQUIRE(r.p_value == Catch::Approx(expected).epsilon(0));
  }
}

TEST_CASE("wilcoxon normal path flags a large synthetic shift") {
  std::mt19937_64 rng(505);
  std::vector<double> a(220), b(220);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<double>(rng() % 1000) / 10.0;
    b[i] = a[i] + 5.0;
  }
  const WilcoxonResult r = wilcoxon_signed_rank(b, a);
  CHECK_FALSE(r.exact);
  CHECK(r.p_value < 1e-5);
  CHECK(r.median_delta == 5.0);
}

TEST_CASE("cliffs_delta pair counting") {
  CHECK(cliffs_delta({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(cliffs_delta({4, 5, 6}, {1, 2, 3}) == 1.0);
  CHECK(cliffs_delta({1, 2, 3}, {2, 2}) == 0.0);  // (2 - 2) / 6
  CHECK_THROWS_AS(cliffs_delta({}, {1.0}), EmptyInputError);
  CHECK_THROWS_AS(cliffs_delta({1.0}, {}), EmptyInputError);
}

TEST_CASE("cliffs_delta matches brute force and is antisymmetric") {
  std::mt19937_64 rng(506);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(1 + rng() % 12), b(1 + rng() % 12);
    for (auto& x : a) x = static_cast<double>(rng() % 10);
    for (auto& x : b) x = static_cast<double>(rng() % 10);
    long gt = 0, lt = 0;
    for (double x : a)
      for (double y : b) {
        gt += x > y;
        lt += x < y;
      }
    const double expected = static_cast<double>(gt - lt) / static_cast<double>(a.size() * b.size());
    REQUIRE(cliffs_delta(a, b) == Catch::Approx(expected).epsilon(0));
    REQUIRE(cliffs_delta(a, b) == Catch::Approx(-cliffs_delta(b, a)).epsilon(0));
  }
}
