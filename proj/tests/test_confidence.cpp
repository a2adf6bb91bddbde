#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "irgp/confidence.hpp"
#include "irgp/errors.hpp"
#include "irgp/rng.hpp"

using namespace irgp;

namespace {

using std::numbers::pi;

std::vector<double> draws(const ConfidenceSchedule& s, long long t, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng r = Rng::keyed({seed, i});
    out[i] = next_confidence(s, t, r).value;
  }
  return out;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(Confidence, ReferenceValues) {
  EXPECT_NEAR(shift_finite(1000), 12.429216, 1e-6);
  EXPECT_NEAR(shift_finite(2), 0.0, 1e-15);
  EXPECT_NEAR(confidence_quantile(schedule::ShiftedExpFinite{1000}, 1, 0.975), 19.806975, 1e-6);
  EXPECT_NEAR(beta_deterministic(1000, 1, 0.1), 19.416081, 1e-6);
  EXPECT_NEAR(gamma_shape(1000, 1), 17.036621, 1e-6);
  EXPECT_NEAR(heuristic_beta(2, 1), 0.2772589, 1e-7);
  EXPECT_NEAR(heuristic_beta(4, 50), 3.684136, 1e-6);
  EXPECT_NEAR(shift_continuous(1.0, 1.0, 1.0, 2, 1), 3.5528, 1e-4);
  EXPECT_NEAR(shift_high_prob(1000, 3, 0.05), 25.1968, 1e-4);
  EXPECT_DOUBLE_EQ(heuristic_shift(3), 1.5);
  // 2 log(pi^2 / 6), the per-round slack summed over t.
  EXPECT_NEAR(2.0 * std::log(pi * pi / 6.0), 0.99540, 1e-5);
}

TEST(Confidence, FormulasAgainstDirectExpressions) {
  for (std::size_t n : {2u, 10u, 125u, 1000u}) {
    for (long long t : {1LL, 7LL, 200LL}) {
      const double td = static_cast<double>(t);
      EXPECT_NEAR(beta_deterministic(n, t, 0.1),
                  2.0 * std::log(n * td * td * pi * pi / 0.6), 1e-12);
      EXPECT_NEAR(gamma_shape(n, t), std::log(n * td * td) / std::log(1.5), 1e-12);
      EXPECT_NEAR(schedule_shift(schedule::ShiftedExpFinite{n}, t), 2.0 * std::log(n / 2.0), 1e-12);
    }
  }
  EXPECT_NEAR(discretization_tau(1.0, 1.0, 1.0, 2, 1.0),
              2.0 * (std::sqrt(std::log(2.0)) + std::sqrt(pi) / 2.0), 1e-12);
  EXPECT_EQ(discretization_grid_size(1.0, 1.0, 1.0, 2, 1.0), 4u);
  const auto coords = discretization_coordinates(1.0, 1.0, 1.0, 2, 1.0);
  ASSERT_EQ(coords.size(), 4u);
  EXPECT_DOUBLE_EQ(coords.front(), 0.2);
  EXPECT_DOUBLE_EQ(coords.back(), 0.8);
}

TEST(Confidence, DiscretizationSizeThree) {
  // tau = b d r u (sqrt(log(a d)) + sqrt(pi)/2) with a d = e gives 1 + 0.886 ~ 1.886 per unit.
  const double a = std::exp(1.0);
  EXPECT_EQ(discretization_grid_size(a, 1.0, 1.0, 1, 1.5), 3u);
  const auto c = discretization_coordinates(a, 1.0, 1.0, 1, 1.5);
  EXPECT_DOUBLE_EQ(c[1], 0.5);
}

TEST(Confidence, ShiftedExponentialIsTimeInvariant) {
  const ConfidenceSchedule s = schedule::ShiftedExpFinite{125};
  const auto a = draws(s, 1, 4000, 11);
  const auto b = draws(s, 100, 4000, 12);
  // Critical value at alpha = 0.001: 1.95 sqrt(2/n).
  EXPECT_LT(ks_statistic(a, b), 1.95 * std::sqrt(2.0 / 4000.0));
  for (double v : a) EXPECT_GE(v, shift_finite(125));
}

TEST(Confidence, ShiftedExponentialMoments) {
  const ConfidenceSchedule s = schedule::ShiftedExpFinite{1000};
  const auto v = draws(s, 5, 20000, 3);
  const double se = 2.0 / std::sqrt(20000.0);
  EXPECT_NEAR(mean_of(v), shift_finite(1000) + 2.0, 4.0 * se);
  EXPECT_NEAR(var_of(v), 4.0, 0.25);
  EXPECT_DOUBLE_EQ(confidence_mean(s, 5), shift_finite(1000) + 2.0);
  // Empirical 0.975 quantile against the analytic one.
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_NEAR(sorted[static_cast<std::size_t>(0.975 * 20000)], 19.806975, 0.3);
}

TEST(Confidence, GammaMoments) {
  const ConfidenceSchedule s = schedule::GammaRandomized{1000, 0.5};
  const auto v = draws(s, 3, 20000, 4);
  const double k = std::log(9000.0) / std::log(1.5);
  EXPECT_NEAR(mean_of(v), k * 0.5, 4.0 * std::sqrt(k * 0.25 / 20000.0));
  EXPECT_NEAR(var_of(v), k * 0.25, 0.1 * k * 0.25);
  EXPECT_NEAR(confidence_mean(s, 3), k * 0.5, 1e-12);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_NEAR(confidence_quantile(s, 3, 0.5), sorted[10000], 0.1);
  for (double x : v) EXPECT_GT(x, 0.0);
}

TEST(Confidence, HeuristicGammaMatchesHeuristicBetaMean) {
  const ConfidenceSchedule s = schedule::HeuristicGamma{2, 1.0};
  EXPECT_NEAR(confidence_mean(s, 10), heuristic_beta(2, 10), 1e-12);
  EXPECT_DOUBLE_EQ(schedule_shift(s, 10), 0.0);
}

TEST(Confidence, RngAdvancesExactlyOnce) {
  const std::vector<ConfidenceSchedule> randomized = {
      schedule::ShiftedExpFinite{10}, schedule::GammaRandomized{10, 1.0},
      schedule::HeuristicShiftedExp{2}, schedule::HeuristicGamma{2, 1.0},
      schedule::ShiftedExpHighProb{10, 0.1}, schedule::ShiftedExpContinuous{1.0, 1.0, 1.0, 2}};
  for (const auto& s : randomized) {
    EXPECT_TRUE(s.randomized()) << s.describe();
    Rng a(99), b(99);
    next_confidence(s, 4, a);
    b();
    EXPECT_EQ(a(), b()) << s.describe();
  }
  const std::vector<ConfidenceSchedule> fixed = {
      schedule::Constant{2.0}, schedule::DeterministicUcb{10, 0.1}, schedule::HeuristicUcb{2}};
  for (const auto& s : fixed) {
    EXPECT_FALSE(s.randomized());
    Rng a(5), b(5);
    const auto d = next_confidence(s, 4, a);
    EXPECT_EQ(d.value, d.shift);
    EXPECT_EQ(a(), b());
    EXPECT_EQ(confidence_quantile(s, 4, 0.1), confidence_quantile(s, 4, 0.9));
  }
}

TEST(Confidence, SameKeySameDraw) {
  const ConfidenceSchedule s = schedule::GammaRandomized{50, 2.0};
  Rng a = Rng::keyed({1, 2, 3}), b = Rng::keyed({1, 2, 3});
  EXPECT_EQ(next_confidence(s, 9, a).value, next_confidence(s, 9, b).value);
}

TEST(Confidence, ValidationErrors) {
  EXPECT_THROW(ConfidenceSchedule(schedule::ShiftedExpFinite{1}), ConfigError);
  EXPECT_THROW(ConfidenceSchedule(schedule::DeterministicUcb{10, 0.0}), ConfigError);
  EXPECT_THROW(ConfidenceSchedule(schedule::DeterministicUcb{10, 1.0}), ConfigError);
  EXPECT_THROW(ConfidenceSchedule(schedule::GammaRandomized{10, 0.0}), ConfigError);
  EXPECT_THROW(ConfidenceSchedule(schedule::ShiftedExpContinuous{0.5, 1.0, 1.0, 1}), ConfigError);
  EXPECT_THROW(ConfidenceSchedule(schedule::Constant{-1.0}), ConfigError);
  EXPECT_THROW(ConfidenceSchedule(schedule::HeuristicUcb{0}), ConfigError);
  EXPECT_THROW(beta_deterministic(10, 0, 0.1), ConfigError);
  EXPECT_THROW(gamma_shape(1, 1), ConfigError);
  EXPECT_THROW(confidence_quantile(schedule::ShiftedExpFinite{10}, 1, 1.0), ConfigError);
  Rng r(1);
  EXPECT_THROW(sample_shifted_exponential(0.0, 0.0, r), ConfigError);
}

TEST(Confidence, ClassificationFlags) {
  EXPECT_TRUE(ConfidenceSchedule(schedule::ShiftedExpFinite{10}).shifted_exponential());
  EXPECT_FALSE(ConfidenceSchedule(schedule::GammaRandomized{10, 1.0}).shifted_exponential());
  EXPECT_FALSE(ConfidenceSchedule(schedule::Constant{1.0}).shifted_exponential());
}
