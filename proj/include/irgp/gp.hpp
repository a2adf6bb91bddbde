#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "irgp/kernel.hpp"
#include "irgp/points.hpp"
#include "irgp/rng.hpp"

namespace irgp {

struct PosteriorStats {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact GP regression state over the observed inputs. The Cholesky factor of
// K + sigma^2 I is kept in packed row-major form so that an observation
// appends one row in O(n^2) without refactorising.
class GpState {
 public:
  GpState(KernelSpec kernel, double noise_variance);

  // Factorises the full dataset from scratch.
  static GpState from_data(KernelSpec kernel, double noise_variance,
                           const PointSet& inputs, std::span<const double> outputs);

  std::size_t size() const noexcept { return outputs_.size(); }
  std::size_t dim() const noexcept { return kernel_.dim(); }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  double noise_variance() const noexcept { return noise_variance_; }
  const PointSet& inputs() const noexcept { return inputs_; }
  std::span<const double> outputs() const noexcept { return outputs_; }

  // Lower-triangular factor as a dense matrix (copies).
  Eigen::MatrixXd chol() const;
  // L^{-1} y.
  std::span<const double> whitened_outputs() const noexcept { return whitened_; }

  PosteriorStats posterior(std::span<const double> x) const;

  // Posterior mean and variance at every point; variances are clamped at 0.
  void posterior_batch(const PointSet& points, std::span<double> mean,
                       std::span<double> variance) const;

  // Returns a new state with (x, y) appended.
  GpState updated(std::span<const double> x, double y) const;

  // In-place form of updated().
  void append(std::span<const double> x, double y);

  double log_marginal_likelihood() const;

 private:
  const double* chol_row(std::size_t i) const noexcept { return packed_.data() + i * (i + 1) / 2; }

  KernelSpec kernel_;
  double noise_variance_;
  PointSet inputs_;
  std::vector<double> outputs_;
  std::vector<double> packed_;    // row i holds L(i, 0..i)
  std::vector<double> whitened_;  // L^{-1} y
};

PosteriorStats posterior(const GpState& state, std::span<const double> x);
GpState incremental_update(const GpState& state, std::span<const double> x, double y);
double log_marginal_likelihood(const GpState& state);

// Grid search over `grid` maximising the log marginal likelihood; ties go to
// the lowest index. An empty dataset returns grid[0].
KernelSpec fit_hyperparameters(const PointSet& inputs, std::span<const double> outputs,
                               std::span<const KernelSpec> grid, double noise_variance);

// Cholesky of cov + jitter*I with jitter escalating x10 from 1e-10*scale up
// to 1e-4*scale. Throws NumericalError when every level fails.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov, double scale);

// Joint draws from N(0, cov) through one cached factorisation.
class PriorSampler {
 public:
  explicit PriorSampler(const Eigen::MatrixXd& covariance, double jitter_scale = 1.0);

  Eigen::VectorXd draw(Rng& rng) const;
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(factor_.rows()); }

 private:
  Eigen::MatrixXd factor_;
};

// One joint draw of f over the candidates from the GP prior.
Eigen::VectorXd sample_prior(const KernelSpec& kernel, const PointSet& candidates,
                             std::uint64_t seed);

// Joint Gaussian posterior over a fixed finite candidate set, conditioned by
// rank-one updates: O(|X|^2) per observation regardless of how many
// observations came before.
class CandidatePosterior {
 public:
  CandidatePosterior(Eigen::MatrixXd prior_covariance, double noise_variance);
  CandidatePosterior(const KernelSpec& kernel, const PointSet& candidates,
                     double noise_variance);

  std::size_t size() const noexcept { return mean_.size(); }
  std::size_t observations() const noexcept { return observations_; }
  double noise_variance() const noexcept { return noise_variance_; }

  std::span<const double> mean() const noexcept { return mean_; }
  // Diagonal of the covariance clamped at 0.
  std::span<const double> variance() const noexcept { return variance_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }

  PosteriorStats at(std::size_t j) const { return {mean_[j], variance_[j]}; }

  // Conditions on y = f(candidate j) + noise.
  void observe(std::size_t j, double y);

 private:
  Eigen::MatrixXd cov_;
  std::vector<double> mean_;
  std::vector<double> variance_;
  std::vector<double> scratch_;
  double noise_variance_;
  std::size_t observations_ = 0;
};

}  // namespace irgp
