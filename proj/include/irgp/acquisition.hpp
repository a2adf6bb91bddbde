#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "irgp/gp.hpp"
#include "irgp/kernel.hpp"
#include "irgp/points.hpp"
#include "irgp/rng.hpp"

namespace irgp {

enum class CandidateProvenance { kFixedGrid, kPerIterationRandom };

struct CandidateSet {
  PointSet points;
  CandidateProvenance provenance = CandidateProvenance::kFixedGrid;
  // Number of uniform draws per iteration for kPerIterationRandom.
  std::size_t random_count = 0;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t dim() const noexcept { return points.dim(); }
};

struct Selection {
  std::size_t index = 0;
  double score = 0.0;
};

// Argmax rules over precomputed posterior arrays. Ties go to the lowest
// index; variances below zero are treated as zero.
Selection ucb_argmax(std::span<const double> mean, std::span<const double> variance,
                     double confidence);
Selection ei_argmax(std::span<const double> mean, std::span<const double> variance,
                    double incumbent);
Selection pi_argmax(std::span<const double> mean, std::span<const double> variance,
                    double threshold);
Selection max_entry(std::span<const double> values);

// (mu - xi) Phi(z) + sigma phi(z) with z = (mu - xi) / sigma; max(mu - xi, 0)
// when sigma = 0.
double expected_improvement(double mu, double sigma, double incumbent) noexcept;
// Phi((mu - threshold) / sigma); 1 if mu >= threshold else 0 when sigma = 0.
double improvement_probability(double mu, double sigma, double threshold) noexcept;

Selection ucb_select(const GpState& state, const CandidateSet& candidates, double confidence);
Selection ei_select(const GpState& state, const CandidateSet& candidates, double incumbent);

// Random Fourier features phi(x) = scale * cos(W x + b), scale = sqrt(2 sv / M).
struct RffModel {
  KernelSpec kernel;
  std::size_t num_features = 0;
  Eigen::MatrixXd frequencies;  // M x d, already divided by the lengthscales
  Eigen::VectorXd phases;       // M, uniform on [0, 2 pi)
  double scale = 0.0;

  Eigen::VectorXd features(std::span<const double> x) const;
  // Row i holds phi(points_i).
  Eigen::MatrixXd features(const PointSet& points) const;
  double approx_kernel(std::span<const double> x, std::span<const double> x2) const;
  // phi(points_i)^T weights for every point.
  Eigen::VectorXd evaluate(const PointSet& points, const Eigen::VectorXd& weights) const;
};

// Frequencies from the spectral density of the kernel: Gaussian for SE and
// multivariate Student-t with 2 nu degrees of freedom for Matern nu.
RffModel build_rff(const KernelSpec& kernel, std::size_t num_features, std::uint64_t seed);

// Weight draw from the posterior of the Bayesian linear model
// y = phi(x)^T w + eps, w ~ N(0, I), eps ~ N(0, noise_variance).
Eigen::VectorXd sample_posterior_weights(const RffModel& rff, const PointSet& inputs,
                                         std::span<const double> outputs, double noise_variance,
                                         Rng& rng);
Eigen::VectorXd sample_posterior_path(const GpState& state, const RffModel& rff,
                                      std::uint64_t seed);

// Argmax of a sampled path over the candidates.
std::size_t ts_select(const GpState& state, const RffModel& rff,
                      const CandidateSet& candidates, std::uint64_t seed);

// f* = max of a sampled path; returns the argmax of the improvement
// probability over f* under the current posterior.
std::size_t pims_select(const GpState& state, const RffModel& rff,
                        const CandidateSet& candidates, std::uint64_t seed);

}  // namespace irgp
