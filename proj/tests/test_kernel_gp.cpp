#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "irgp/errors.hpp"
#include "irgp/gp.hpp"
#include "irgp/kernel.hpp"
#include "irgp/points.hpp"
#include "irgp/rng.hpp"
#include "irgp/simd/ops.hpp"

using namespace irgp;

namespace {

PointSet random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng r(seed);
  PointSet p(d);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = r.uniform();
    p.push_back(x);
  }
  return p;
}

// Independent closed forms on the scaled distance.
double kernel_oracle(KernelFamily fam, double r, double sv) {
  switch (fam) {
    case KernelFamily::kSquaredExponential:
      return sv * std::exp(-0.5 * r * r);
    case KernelFamily::kMatern52: {
      const double a = std::sqrt(5.0) * r;
      return sv * (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    case KernelFamily::kMatern32: {
      const double a = std::sqrt(3.0) * r;
      return sv * (1.0 + a) * std::exp(-a);
    }
  }
  return 0.0;
}

Eigen::MatrixXd dense_gram(const KernelSpec& k, const PointSet& a, const PointSet& b) {
  Eigen::MatrixXd g(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      double r2 = 0.0;
      for (std::size_t d = 0; d < a.dim(); ++d) {
        const double z = (a.coord(i, d) - b.coord(j, d)) / k.lengthscales[d];
        r2 += z * z;
      }
      g(i, j) = kernel_oracle(k.family, std::sqrt(r2), k.signal_variance);
    }
  }
  return g;
}

struct DenseGp {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

DenseGp dense_posterior(const KernelSpec& k, double noise, const PointSet& x,
                        const std::vector<double>& y, const PointSet& probes) {
  const Eigen::MatrixXd kxx =
      dense_gram(k, x, x) + noise * Eigen::MatrixXd::Identity(x.size(), x.size());
  const Eigen::MatrixXd kxp = dense_gram(k, x, probes);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  const Eigen::MatrixXd inv = kxx.inverse();
  DenseGp out;
  out.mean = kxp.transpose() * inv * yv;
  out.var.resize(probes.size());
  for (std::size_t j = 0; j < probes.size(); ++j) {
    out.var[j] = k.signal_variance - (kxp.col(j).transpose() * inv * kxp.col(j))(0, 0);
  }
  return out;
}

}  // namespace

TEST(Kernel, ReferenceValues) {
  const auto se = KernelSpec::isotropic(KernelFamily::kSquaredExponential, 1.0, 1);
  const double x0[] = {0.0};
  const double x1[] = {1.0};
  EXPECT_DOUBLE_EQ(kernel_eval(se, x0, x0), 1.0);
  EXPECT_NEAR(kernel_eval(se, x0, x1), std::exp(-0.5), 1e-15);
  const auto m52 = KernelSpec::isotropic(KernelFamily::kMatern52, 1.0, 1);
  EXPECT_DOUBLE_EQ(kernel_eval(m52, x1, x1), 1.0);
}

TEST(Kernel, MatchesClosedFormsWithArd) {
  for (auto fam : {KernelFamily::kSquaredExponential, KernelFamily::kMatern52,
                   KernelFamily::kMatern32}) {
    KernelSpec k;
    k.family = fam;
    k.lengthscales = {0.3, 1.7, 0.05};
    k.signal_variance = 2.5;
    const auto a = random_points(15, 3, 1);
    const auto b = random_points(9, 3, 2);
    const Eigen::MatrixXd oracle = dense_gram(k, a, b);
    std::vector<double> row(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      kernel_row(k, a.point(i), b, row);
      for (std::size_t j = 0; j < b.size(); ++j) {
        EXPECT_NEAR(row[j], oracle(i, j), 1e-13);
        EXPECT_NEAR(kernel_eval(k, a.point(i), b.point(j)), oracle(i, j), 1e-13);
        EXPECT_DOUBLE_EQ(kernel_eval(k, a.point(i), b.point(j)),
                         kernel_eval(k, b.point(j), a.point(i)));
      }
    }
    const Eigen::MatrixXd g = gram_matrix(k, a);
    EXPECT_LT((g - dense_gram(k, a, a)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_EQ(g, g.transpose());
    for (Eigen::Index i = 0; i < g.rows(); ++i) EXPECT_DOUBLE_EQ(g(i, i), 2.5);
  }
}

TEST(Kernel, ValidationAndNames) {
  KernelSpec k;
  k.lengthscales = {1.0, 0.0};
  EXPECT_THROW(k.validate(), ConfigError);
  k.lengthscales = {1.0};
  k.signal_variance = -1.0;
  EXPECT_THROW(k.validate(), ConfigError);
  const double x[] = {0.0, 0.0};
  const double y[] = {0.0};
  EXPECT_THROW(kernel_eval(KernelSpec{}, x, y), ConfigError);
  EXPECT_EQ(parse_family(family_name(KernelFamily::kMatern32)), KernelFamily::kMatern32);
  EXPECT_THROW(parse_family("rbf-ish"), ConfigError);
}

TEST(Kernel, ScalarAndAvx2RowsIdentical) {
  if (!simd::cpu_supports(simd::Isa::kAvx2)) GTEST_SKIP();
  const auto before = simd::active().isa;
  KernelSpec k;
  k.family = KernelFamily::kMatern52;
  k.lengthscales = {0.2, 0.4};
  const auto pts = random_points(1001, 2, 3);
  const double x[] = {0.3, 0.6};
  std::vector<double> a(pts.size()), b(pts.size());
  simd::set_active(simd::Isa::kScalar);
  kernel_row(k, x, pts, a);
  simd::set_active(simd::Isa::kAvx2);
  kernel_row(k, x, pts, b);
  simd::set_active(before);
  EXPECT_EQ(a, b);
}

TEST(GpCore, EmptyStateReturnsPrior) {
  KernelSpec k = KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.5, 2, 1.7);
  GpState s(k, 0.1);
  const double x[] = {0.2, 0.9};
  const auto p = s.posterior(x);
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_DOUBLE_EQ(p.variance, 1.7);
}

TEST(GpCore, SingleObservationScalarFormula) {
  GpState s(KernelSpec::isotropic(KernelFamily::kSquaredExponential, 1.0, 1), 1.0);
  const double x[] = {0.0};
  s.append(x, 1.0);
  const auto p = s.posterior(x);
  EXPECT_NEAR(p.mean, 0.5, 1e-15);
  EXPECT_NEAR(p.variance, 0.5, 1e-15);
  EXPECT_NEAR(s.chol()(0, 0), std::sqrt(2.0), 1e-15);
}

TEST(GpCore, IncrementalMatchesDenseRebuild) {
  const KernelSpec k = KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.4, 3);
  const double noise = 1e-3;
  const auto x = random_points(50, 3, 17);
  const auto probes = random_points(20, 3, 18);
  Rng r(19);
  std::vector<double> y(50);
  for (auto& v : y) v = r.normal();

  GpState inc(k, noise);
  for (std::size_t i = 0; i < 50; ++i) inc = incremental_update(inc, x.point(i), y[i]);
  const GpState batch = GpState::from_data(k, noise, x, y);
  const auto oracle = dense_posterior(k, noise, x, y, probes);

  std::vector<double> m(20), v(20);
  inc.posterior_batch(probes, m, v);
  for (std::size_t j = 0; j < 20; ++j) {
    const auto pi = posterior(inc, probes.point(j));
    const auto pb = batch.posterior(probes.point(j));
    EXPECT_NEAR(pi.mean, pb.mean, 1e-8);
    EXPECT_NEAR(pi.variance, pb.variance, 1e-8);
    EXPECT_NEAR(pi.mean, oracle.mean[j], 1e-8);
    EXPECT_NEAR(pi.variance, std::max(oracle.var[j], 0.0), 1e-8);
    EXPECT_NEAR(m[j], pi.mean, 1e-12);
    EXPECT_NEAR(v[j], pi.variance, 1e-12);
  }
  // The factor reproduces K + noise I.
  const Eigen::MatrixXd l = inc.chol();
  const Eigen::MatrixXd full = dense_gram(k, x, x) + noise * Eigen::MatrixXd::Identity(50, 50);
  EXPECT_LT((l * l.transpose() - full).norm() / full.norm(), 1e-8);
  for (Eigen::Index i = 0; i < l.rows(); ++i) EXPECT_GT(l(i, i), 0.0);
}

TEST(GpCore, UpdatedLeavesOriginalUntouched) {
  const KernelSpec k = KernelSpec::isotropic(KernelFamily::kMatern32, 0.3, 1);
  GpState s(k, 0.01);
  const double a[] = {0.1};
  const double b[] = {0.7};
  s.append(a, 1.0);
  const GpState t = s.updated(b, -1.0);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(t.size(), 2u);
}

TEST(GpCore, DuplicateInputsStayPositiveDefinite) {
  GpState s(KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.1, 1), 1e-4);
  const double x[] = {0.5};
  double prev = s.posterior(x).variance;
  for (int i = 0; i < 5; ++i) {
    s.append(x, 0.3);
    const double v = s.posterior(x).variance;
    EXPECT_LT(v, prev);
    prev = v;
  }
  const Eigen::MatrixXd l = s.chol();
  for (Eigen::Index i = 0; i < l.rows(); ++i) EXPECT_GT(l(i, i), 0.0);
}

TEST(GpCore, VarianceBoundedByPrior) {
  const KernelSpec k = KernelSpec::isotropic(KernelFamily::kMatern52, 0.2, 2);
  const auto x = random_points(30, 2, 4);
  std::vector<double> y(30, 0.0);
  const GpState s = GpState::from_data(k, 1e-4, x, y);
  const auto probes = random_points(200, 2, 5);
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const auto p = s.posterior(probes.point(j));
    EXPECT_GE(p.variance, 0.0);
    EXPECT_LE(p.variance, 1.0 + 1e-8);
  }
}

TEST(GpCore, RejectsNonFiniteObservation) {
  GpState s(KernelSpec::isotropic(KernelFamily::kSquaredExponential, 1.0, 1), 0.1);
  const double x[] = {0.0};
  EXPECT_THROW(s.append(x, std::nan("")), ObservationError);
  EXPECT_THROW(s.append(x, INFINITY), ObservationError);
  const double bad[] = {0.0, 1.0};
  EXPECT_THROW(s.append(bad, 1.0), ConfigError);
}

TEST(GpCore, LogMarginalLikelihoodScalarExample) {
  GpState s(KernelSpec::isotropic(KernelFamily::kSquaredExponential, 1.0, 1), 1.0);
  const double x[] = {0.0};
  s.append(x, 0.0);
  EXPECT_NEAR(log_marginal_likelihood(s), -0.5 * std::log(2.0) - 0.5 * std::log(2.0 * std::numbers::pi),
              1e-14);
}

TEST(GpCore, LogMarginalLikelihoodMatchesDenseDensity) {
  const KernelSpec k = KernelSpec::isotropic(KernelFamily::kMatern52, 0.35, 2, 1.3);
  const auto x = random_points(5, 2, 21);
  const std::vector<double> y = {0.3, -1.2, 0.8, 2.0, -0.1};
  const GpState s = GpState::from_data(k, 0.05, x, y);
  const Eigen::MatrixXd c = dense_gram(k, x, x) + 0.05 * Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 5);
  const double oracle = -0.5 * yv.dot(c.inverse() * yv) - 0.5 * std::log(c.determinant()) -
                        2.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(s.log_marginal_likelihood(), oracle, 1e-8);

  // Permutation invariance.
  PointSet xp(2);
  std::vector<double> yp;
  for (std::size_t i : {3u, 0u, 4u, 1u, 2u}) {
    xp.push_back(x.point(i));
    yp.push_back(y[i]);
  }
  EXPECT_NEAR(GpState::from_data(k, 0.05, xp, yp).log_marginal_likelihood(), oracle, 1e-8);
}

TEST(GpCore, FitHyperparametersRules) {
  const auto x = random_points(10, 1, 31);
  std::vector<double> y(10);
  Rng r(32);
  for (auto& v : y) v = r.normal();
  const std::vector<KernelSpec> one = {KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.3, 1)};
  EXPECT_EQ(fit_hyperparameters(x, y, one, 1e-2), one[0]);

  const std::vector<KernelSpec> dup = {KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.3, 1),
                                       KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.3, 1),
                                       KernelSpec::isotropic(KernelFamily::kSquaredExponential, 5.0, 1)};
  // Identical specs tie; the first must win whenever they are best.
  const auto best = fit_hyperparameters(x, y, dup, 1e-2);
  EXPECT_TRUE(best == dup[0] || best == dup[2]);

  const std::vector<KernelSpec> grid = {KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.7, 1),
                                        KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.1, 1)};
  EXPECT_EQ(fit_hyperparameters(PointSet(1), {}, grid, 1e-2), grid[0]);
  EXPECT_THROW(fit_hyperparameters(x, y, std::span<const KernelSpec>{}, 1e-2), ConfigError);
}

TEST(GpCore, FitHyperparametersRecoversLengthscale) {
  const std::vector<double> ells = {0.05, 0.1, 0.2, 0.5};
  std::vector<KernelSpec> grid;
  for (double l : ells) grid.push_back(KernelSpec::isotropic(KernelFamily::kSquaredExponential, l, 1));
  const double noise = 1e-4;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto x = random_points(200, 1, 1000 + seed);
    const Eigen::VectorXd f = sample_prior(grid[1], x, 2000 + seed);
    Rng r(3000 + seed);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = f[static_cast<Eigen::Index>(i)] + 1e-2 * r.normal();
    if (fit_hyperparameters(x, y, grid, noise) == grid[1]) ++hits;
  }
  EXPECT_GE(hits, 45);
}

TEST(GpCore, JitteredCholeskyEscalatesAndFails) {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const Eigen::MatrixXd l = jittered_cholesky(ones, 1.0);
  EXPECT_LT((l * l.transpose() - ones).cwiseAbs().maxCoeff(), 1e-3);
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(jittered_cholesky(neg, 1.0), NumericalError);
}

TEST(PriorSampling, SingleCandidateMoments) {
  const KernelSpec k = KernelSpec::isotropic(KernelFamily::kSquaredExponential, 1.0, 1);
  PointSet one(1);
  const double x[] = {0.3};
  one.push_back(x);
  double s = 0.0, s2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double v = sample_prior(k, one, static_cast<std::uint64_t>(i))[0];
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 3.0 / std::sqrt(n));
  EXPECT_GE(var, 0.94);
  EXPECT_LE(var, 1.06);
}

TEST(PriorSampling, IdenticalCandidatesAgree) {
  const KernelSpec k = KernelSpec::isotropic(KernelFamily::kSquaredExponential, 1.0, 1);
  PointSet two(1);
  const double x[] = {0.3};
  two.push_back(x);
  two.push_back(x);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto f = sample_prior(k, two, s);
    EXPECT_NEAR(f[0], f[1], 1e-3);
  }
}

TEST(PriorSampling, EmpiricalCovarianceMatchesGram) {
  const KernelSpec k = KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.1, 1);
  PointSet grid(1);
  for (int i = 0; i < 100; ++i) {
    const double x[] = {i / 99.0};
    grid.push_back(x);
  }
  const Eigen::MatrixXd gram = gram_matrix(k, grid);
  PriorSampler sampler(gram);
  const int n = 5000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(100, 100);
  for (int i = 0; i < n; ++i) {
    Rng r(static_cast<std::uint64_t>(i));
    const Eigen::VectorXd f = sampler.draw(r);
    acc.noalias() += f * f.transpose();
  }
  acc /= n;
  EXPECT_LT((acc - gram).cwiseAbs().maxCoeff(), 0.1);
  EXPECT_LT((acc - gram).cwiseAbs().mean(), 0.05);
  // Deterministic given the seed.
  EXPECT_EQ(sample_prior(k, grid, 77), sample_prior(k, grid, 77));
}

TEST(CandidatePosterior, MatchesGpState) {
  const KernelSpec k = KernelSpec::isotropic(KernelFamily::kSquaredExponential, 0.25, 2);
  const auto cands = random_points(60, 2, 41);
  CandidatePosterior cp(k, cands, 1e-3);
  GpState s(k, 1e-3);
  Rng r(42);
  for (int step = 0; step < 40; ++step) {
    const std::size_t j = static_cast<std::size_t>(r() % 60);
    const double y = r.normal();
    cp.observe(j, y);
    s.append(cands.point(j), y);
  }
  EXPECT_EQ(cp.observations(), 40u);
  for (std::size_t j = 0; j < 60; ++j) {
    const auto p = s.posterior(cands.point(j));
    EXPECT_NEAR(cp.mean()[j], p.mean, 1e-8);
    EXPECT_NEAR(cp.variance()[j], p.variance, 1e-8);
  }
  EXPECT_EQ(cp.covariance(), cp.covariance().transpose());
}

TEST(CandidatePosterior, CounterexampleClosedForms) {
  for (double rho : {0.0, 0.4, -0.7}) {
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, rho, rho, 0.99;
    CandidatePosterior cp(cov, 1.0);
    Rng r(5);
    double sum = 0.0;
    for (int t = 1; t <= 30; ++t) {
      const double y = 1.0 + r.normal();
      sum += y;
      cp.observe(0, y);
      const double ybar = sum / t;
      EXPECT_NEAR(cp.mean()[0], t / (t + 1.0) * ybar, 1e-8);
      EXPECT_NEAR(cp.mean()[1], rho * t / (t + 1.0) * ybar, 1e-8);
    }
  }
}
