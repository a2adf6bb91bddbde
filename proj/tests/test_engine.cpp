#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "irgp/analysis.hpp"
#include "irgp/bench.hpp"
#include "irgp/engine.hpp"
#include "irgp/errors.hpp"
#include "irgp/gp.hpp"

using namespace irgp;

namespace {

KernelSpec se(double ell, std::size_t d) {
  return KernelSpec::isotropic(KernelFamily::kSquaredExponential, ell, d);
}

ProblemInstance small_instance(double noise_sd = 0.01, std::uint64_t seed = 3) {
  return make_synthetic_instance(se(0.3, 2), GridSpec::uniform(0.0, 1.0, 6, 2), noise_sd, seed);
}

BoConfig ucb_config(ConfidenceSchedule s, long long T) {
  BoConfig c;
  c.schedule = s;
  c.kernel = se(0.3, 2);
  c.noise_variance = 1e-4;
  c.horizon = T;
  return c;
}

void expect_same_trace(const BoTrace& a, const BoTrace& b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  EXPECT_EQ(a.initial_size, b.initial_size);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    EXPECT_EQ(x.index, y.index);
    EXPECT_EQ(x.x, y.x);
    EXPECT_EQ(std::isnan(x.zeta), std::isnan(y.zeta));
    if (!std::isnan(x.zeta)) {
      EXPECT_EQ(x.zeta, y.zeta);
    }
    EXPECT_EQ(x.y, y.y);
    EXPECT_EQ(x.mu, y.mu);
    EXPECT_EQ(x.sigma, y.sigma);
    EXPECT_EQ(x.cumulative, y.cumulative);
  }
}

// Gauss-Hermite nodes and weights for E[g(Z)], Z ~ N(0, 1), via Golub-Welsch.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    nodes[static_cast<std::size_t>(i)] = std::numbers::sqrt2 * es.eigenvalues()[i];
    weights[static_cast<std::size_t>(i)] = v0 * v0;
  }
}

}  // namespace

TEST(Engine, BitwiseDeterministic) {
  const auto inst = small_instance();
  for (const char* acq : {"ucb", "ei", "ts", "pims"}) {
    auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 15);
    cfg.acquisition = parse_acquisition(acq);
    cfg.rff_features = 200;
    expect_same_trace(run_bo(inst, cfg, 11, 2), run_bo(inst, cfg, 11, 2));
  }
}

TEST(Engine, DifferentSeedsDiffer) {
  const auto inst = small_instance();
  const auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 20);
  const auto a = run_bo(inst, cfg, 1, 0);
  const auto b = run_bo(inst, cfg, 2, 0);
  EXPECT_NE(a.records.front().zeta, b.records.front().zeta);
}

TEST(Engine, TraceInvariants) {
  const auto inst = small_instance();
  const auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 30);
  const auto tr = run_bo(inst, cfg, 5, 1);
  ASSERT_EQ(tr.records.size(), 30u);
  EXPECT_EQ(tr.initial_size, 4u);
  EXPECT_EQ(tr.optimum_value, inst.optimum_value);
  double sum = 0.0;
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& r = tr.records[i];
    EXPECT_EQ(r.t, static_cast<long long>(i + 1));
    EXPECT_EQ(r.x, inst.candidates.points.point(r.index));
    EXPECT_EQ(r.f, inst.true_values[r.index]);
    EXPECT_GE(r.regret, 0.0);
    EXPECT_DOUBLE_EQ(r.regret, inst.optimum_value - r.f);
    sum += r.regret;
    EXPECT_DOUBLE_EQ(r.cumulative, sum);
    EXPECT_GE(r.sigma, 0.0);
    EXPECT_GE(r.zeta, r.shift);
    EXPECT_DOUBLE_EQ(r.shift, shift_finite(36));
  }
  EXPECT_DOUBLE_EQ(tr.cumulative_regret(), sum);
}

TEST(Engine, ReplayMatchesBatchPosterior) {
  // Noise-free observations so the design values are known exactly.
  const auto inst = small_instance(0.0);
  auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 25);
  cfg.initial_indices = {0, 35};
  const auto tr = run_bo(inst, cfg, 8, 0);
  PointSet x(2);
  std::vector<double> y;
  for (std::size_t j : cfg.initial_indices) {
    x.push_back(inst.candidates.points.point(j));
    y.push_back(inst.true_values[j]);
  }
  for (const auto& r : tr.records) {
    const GpState g = GpState::from_data(cfg.kernel, cfg.noise_variance, x, y);
    const auto p = g.posterior(r.x);
    EXPECT_NEAR(r.mu, p.mean, 1e-8);
    EXPECT_NEAR(r.sigma, std::sqrt(std::max(p.variance, 0.0)), 1e-5);
    // The selection maximises the UCB over every candidate.
    for (std::size_t j = 0; j < inst.candidates.size(); ++j) {
      const auto q = g.posterior(inst.candidates.points.point(j));
      EXPECT_LE(q.mean + std::sqrt(r.zeta * std::max(q.variance, 0.0)),
                r.mu + std::sqrt(r.zeta) * r.sigma + 1e-6);
    }
    EXPECT_NEAR(r.info_gain, 0.5 * std::log1p(std::max(p.variance, 0.0) / cfg.noise_variance), 1e-4);
    x.push_back(r.x);
    y.push_back(r.y);
  }
}

TEST(Engine, ReplicationsMatchSingleRuns) {
  const auto sampler = synthetic_sampler(se(0.3, 2), GridSpec::uniform(0.0, 1.0, 5, 2), 0.01);
  const auto cfg = ucb_config(schedule::GammaRandomized{25, 1.0}, 12);
  const auto multi = run_replications(sampler, cfg, 6, 9, 4);
  const auto serial = run_replications(sampler, cfg, 6, 9, 1);
  for (std::size_t i = 0; i < 6; ++i) {
    ASSERT_TRUE(multi[i].trace);
    expect_same_trace(*multi[i].trace, run_bo(sampler(9, i), cfg, 9, i));
    expect_same_trace(*multi[i].trace, *serial[i].trace);
  }
  const auto one = run_replications(sampler, cfg, 1, 9, 0);
  ASSERT_EQ(one.size(), 1u);
  expect_same_trace(*one[0].trace, run_bo(sampler(9, 0), cfg, 9, 0));
}

TEST(Engine, ZetaMeanMatchesSchedule) {
  const auto inst = small_instance();
  const auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 50);
  double s = 0.0;
  int n = 0;
  for (std::size_t rep = 0; rep < 40; ++rep) {
    for (const auto& r : run_bo(inst, cfg, 3, rep).records) {
      s += r.zeta;
      ++n;
    }
  }
  EXPECT_NEAR(s / n, shift_finite(36) + 2.0, 4.0 * 2.0 / std::sqrt(n));
}

TEST(Engine, FixedZetaSequenceIsUsed) {
  const auto inst = small_instance();
  auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 5);
  cfg.zeta_sequence = std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto tr = run_bo(inst, cfg, 1, 0);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(tr.records[i].zeta, i + 1.0);
  cfg.zeta_sequence = std::vector<double>{1.0};
  EXPECT_THROW(run_bo(inst, cfg, 1, 0), ConfigError);
}

TEST(Engine, NonUcbLeavesZetaUnset) {
  const auto inst = small_instance();
  auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 3);
  cfg.acquisition = AcquisitionKind::kEi;
  for (const auto& r : run_bo(inst, cfg, 1, 0).records) EXPECT_TRUE(std::isnan(r.zeta));
}

TEST(Engine, FailuresAreRecordedPerReplication) {
  const auto good = small_instance();
  const auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 3);
  InstanceSampler flaky = [&](std::uint64_t, std::size_t rep) -> ProblemInstance {
    if (rep % 2 == 1) throw NumericalError("broken instance");
    return good;
  };
  const auto res = run_replications(flaky, cfg, 4, 0, 2);
  EXPECT_TRUE(res[0].trace);
  EXPECT_FALSE(res[1].trace);
  EXPECT_NE(res[1].error.find("broken"), std::string::npos);
  EXPECT_EQ(successful_traces(res).size(), 2u);

  InstanceSampler dead = [](std::uint64_t, std::size_t) -> ProblemInstance {
    throw NumericalError("always");
  };
  EXPECT_THROW(run_replications(dead, cfg, 3, 0, 1), NumericalError);
  InstanceSampler misconfigured = [](std::uint64_t, std::size_t) -> ProblemInstance {
    throw ConfigError("bad");
  };
  EXPECT_THROW(run_replications(misconfigured, cfg, 3, 0, 1), ConfigError);
  EXPECT_THROW(run_replications(fixed_instance(good), cfg, 0, 0, 1), ConfigError);
}

TEST(Engine, ConfigValidation) {
  const auto inst = small_instance();
  auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 0);
  EXPECT_THROW(run_bo(inst, cfg, 0, 0), ConfigError);
  cfg = ucb_config(schedule::ShiftedExpFinite{36}, 3);
  cfg.kernel = se(0.3, 3);
  EXPECT_THROW(run_bo(inst, cfg, 0, 0), ConfigError);
  cfg = ucb_config(schedule::ShiftedExpFinite{36}, 3);
  cfg.initial_indices = {99};
  EXPECT_THROW(run_bo(inst, cfg, 0, 0), ConfigError);
  cfg = ucb_config(schedule::ShiftedExpFinite{36}, 3);
  cfg.refit_period = 2;
  EXPECT_THROW(run_bo(inst, cfg, 0, 0), ConfigError);
  EXPECT_THROW(parse_acquisition("random"), ConfigError);
}

TEST(Engine, ThompsonFirstSelectionSplitsEvenly) {
  PointSet pts(1);
  for (double v : {0.2, 0.8}) {
    const double x[] = {v};
    pts.push_back(x);
  }
  const auto sampler = synthetic_sampler(se(0.1, 1), pts, 0.01);
  BoConfig cfg;
  cfg.acquisition = AcquisitionKind::kTs;
  cfg.kernel = se(0.1, 1);
  cfg.horizon = 1;
  cfg.initial_size = 0;
  cfg.rff_features = 500;
  const int n = 1000;
  int first = 0;
  for (const auto& r : run_replications(sampler, cfg, n, 4, 0)) {
    first += r.trace->records.front().index == 0 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(first) / n, 0.5, 4.0 * std::sqrt(0.25 / n));
}

TEST(Engine, RefitChangesKernelDeterministically) {
  const auto inst = small_instance();
  auto cfg = ucb_config(schedule::ShiftedExpFinite{36}, 10);
  cfg.refit_period = 3;
  cfg.refit_grid = {se(0.05, 2), se(0.3, 2), se(1.0, 2)};
  expect_same_trace(run_bo(inst, cfg, 2, 0), run_bo(inst, cfg, 2, 0));
}

TEST(Engine, GreedyTwoPointBcrMatchesQuadrature) {
  // Two correlated points, empty design, beta = 0: the first pick is index 0
  // by the tie rule and the second follows the sign of y_1.
  const double k12 = std::exp(-0.5);
  const double noise_sd = 0.5;
  PointSet pts(1);
  for (double v : {0.0, 1.0}) {
    const double x[] = {v};
    pts.push_back(x);
  }
  BoConfig cfg;
  cfg.schedule = schedule::Constant{0.0};
  cfg.kernel = se(1.0, 1);
  cfg.noise_variance = noise_sd * noise_sd;
  cfg.horizon = 2;
  cfg.initial_size = 0;
  const auto summary = estimate_bcr(synthetic_sampler(cfg.kernel, pts, noise_sd), cfg, 40000, 21, 0);

  std::vector<double> z, w;
  gauss_hermite(64, z, w);
  const double c = std::sqrt(1.0 - k12 * k12);
  double oracle = 0.0;
  for (std::size_t a = 0; a < z.size(); ++a) {
    for (std::size_t b = 0; b < z.size(); ++b) {
      for (std::size_t e = 0; e < z.size(); ++e) {
        const double f1 = z[a];
        const double f2 = k12 * z[a] + c * z[b];
        const double y1 = f1 + noise_sd * z[e];
        const double best = std::max(f1, f2);
        const double second = y1 >= 0.0 ? f1 : f2;
        oracle += w[a] * w[b] * w[e] * ((best - f1) + (best - second));
      }
    }
  }
  // First-round regret in closed form: E[max(0, f2 - f1)] = sd / sqrt(2 pi).
  EXPECT_NEAR(summary.mean_curve[0], std::sqrt(2.0 * (1.0 - k12)) / std::sqrt(2.0 * std::numbers::pi),
              4.0 * summary.stderr_curve[0]);
  EXPECT_NEAR(summary.mean_cumulative, oracle, 4.0 * summary.stderr_cumulative + 2e-3);
}
