#include "irgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "irgp/errors.hpp"
#include "irgp/simd/ops.hpp"

namespace irgp {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

void check_dim(const KernelSpec& kernel, std::size_t got, const char* what) {
  if (got != kernel.dim()) {
    throw ConfigError(std::string(what) + ": point dimension " + std::to_string(got) +
                      " does not match kernel dimension " + std::to_string(kernel.dim()));
  }
}

}  // namespace

GpState::GpState(KernelSpec kernel, double noise_variance)
    : kernel_(std::move(kernel)), noise_variance_(noise_variance), inputs_(kernel_.dim()) {
  kernel_.validate();
  if (!(noise_variance_ >= 0.0) || !std::isfinite(noise_variance_)) {
    throw ConfigError("noise variance must be finite and non-negative");
  }
}

GpState GpState::from_data(KernelSpec kernel, double noise_variance, const PointSet& inputs,
                           std::span<const double> outputs) {
  if (inputs.size() != outputs.size()) {
    throw ConfigError("inputs and outputs differ in length (" + std::to_string(inputs.size()) +
                      " vs " + std::to_string(outputs.size()) + ")");
  }
  GpState state(std::move(kernel), noise_variance);
  if (!inputs.empty()) check_dim(state.kernel_, inputs.dim(), "GpState::from_data");
  const std::size_t n = inputs.size();
  state.inputs_.reserve(n);
  state.outputs_.reserve(n);
  state.whitened_.reserve(n);
  state.packed_.reserve(n * (n + 1) / 2);
  // Appending row by row is the Cholesky-Banachiewicz order, so the batch
  // factor is the same computation as n incremental updates.
  for (std::size_t i = 0; i < n; ++i) state.append(inputs.point(i), outputs[i]);
  return state;
}

Eigen::MatrixXd GpState::chol() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* row = chol_row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = row[j];
  }
  return l;
}

void GpState::append(std::span<const double> x, double y) {
  check_dim(kernel_, x.size(), "incremental_update");
  if (!std::isfinite(y)) throw ObservationError("observation is not finite");

  const std::size_t n = size();
  const auto& ops = simd::active();
  std::vector<double> c(n + 1);
  kernel_row(kernel_, x, inputs_, std::span<double>(c.data(), n));
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = chol_row(i);
    c[i] = (c[i] - ops.dot(row, c.data(), i)) / row[i];
  }
  const double base = kernel_eval(kernel_, x, x) + noise_variance_ - ops.dot(c.data(), c.data(), n);
  double pivot = base;
  if (!(pivot > 0.0) || !std::isfinite(pivot)) {
    pivot = 0.0;
    for (double j = kJitterStart; j <= kJitterMax * 1.0000001; j *= 10.0) {
      const double trial = base + j * kernel_.signal_variance;
      if (trial > 0.0 && std::isfinite(trial)) {
        pivot = trial;
        break;
      }
    }
    if (pivot == 0.0) {
      throw NumericalError("Cholesky update broke down (pivot " + std::to_string(base) +
                           ") even with maximal jitter");
    }
  }
  c[n] = std::sqrt(pivot);

  const double w = (y - ops.dot(c.data(), whitened_.data(), n)) / c[n];
  packed_.insert(packed_.end(), c.begin(), c.end());
  whitened_.push_back(w);
  inputs_.push_back(x);
  outputs_.push_back(y);
}

GpState GpState::updated(std::span<const double> x, double y) const {
  GpState next = *this;
  next.append(x, y);
  return next;
}

PosteriorStats GpState::posterior(std::span<const double> x) const {
  check_dim(kernel_, x.size(), "posterior");
  const double prior = kernel_eval(kernel_, x, x);
  const std::size_t n = size();
  if (n == 0) return {0.0, prior};
  const auto& ops = simd::active();
  std::vector<double> c(n);
  kernel_row(kernel_, x, inputs_, c);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = chol_row(i);
    c[i] = (c[i] - ops.dot(row, c.data(), i)) / row[i];
  }
  const double mean = ops.dot(c.data(), whitened_.data(), n);
  const double var = prior - ops.dot(c.data(), c.data(), n);
  return {mean, std::max(var, 0.0)};
}

void GpState::posterior_batch(const PointSet& points, std::span<double> mean,
                              std::span<double> variance) const {
  const std::size_t m = points.size();
  if (mean.size() < m || variance.size() < m) {
    throw ConfigError("posterior_batch: output spans are shorter than the point set");
  }
  if (m == 0) return;
  check_dim(kernel_, points.dim(), "posterior_batch");
  const std::size_t n = size();
  const double prior = kernel_.signal_variance;
  std::fill_n(mean.begin(), m, 0.0);
  std::fill_n(variance.begin(), m, prior);
  if (n == 0) return;

  const auto& ops = simd::active();
  // Row i of v becomes row i of L^{-1} K(X_obs, points) by forward substitution.
  std::vector<double> v(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    double* vi = v.data() + i * m;
    kernel_row(kernel_, inputs_.point(i), points, std::span<double>(vi, m));
    const double* row = chol_row(i);
    for (std::size_t j = 0; j < i; ++j) ops.axpy(-row[j], v.data() + j * m, vi, m);
    const double inv = 1.0 / row[i];
    for (std::size_t k = 0; k < m; ++k) vi[k] *= inv;
    ops.axpy(whitened_[i], vi, mean.data(), m);
    ops.subtract_squares(vi, variance.data(), m);
  }
  for (std::size_t k = 0; k < m; ++k) variance[k] = std::max(variance[k], 0.0);
}

double GpState::log_marginal_likelihood() const {
  const std::size_t n = size();
  double quad = 0.0;
  double logdet = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    quad += whitened_[i] * whitened_[i];
    logdet += std::log(chol_row(i)[i]);
  }
  return -0.5 * quad - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

PosteriorStats posterior(const GpState& state, std::span<const double> x) {
  return state.posterior(x);
}

GpState incremental_update(const GpState& state, std::span<const double> x, double y) {
  return state.updated(x, y);
}

double log_marginal_likelihood(const GpState& state) { return state.log_marginal_likelihood(); }

KernelSpec fit_hyperparameters(const PointSet& inputs, std::span<const double> outputs,
                               std::span<const KernelSpec> grid, double noise_variance) {
  if (grid.empty()) throw ConfigError("fit_hyperparameters: empty hyperparameter grid");
  if (outputs.empty()) return grid[0];
  std::size_t best = 0;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double lml = -std::numeric_limits<double>::infinity();
    try {
      lml = GpState::from_data(grid[g], noise_variance, inputs, outputs).log_marginal_likelihood();
    } catch (const NumericalError&) {
      // A spec whose Gram matrix cannot be factorised is never selected.
    }
    if (lml > best_lml) {
      best_lml = lml;
      best = g;
    }
  }
  return grid[best];
}

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov, double scale) {
  if (cov.rows() != cov.cols()) throw ConfigError("covariance matrix is not square");
  const auto n = cov.rows();
  for (double j = kJitterStart; j <= kJitterMax * 1.0000001; j *= 10.0) {
    Eigen::MatrixXd a = cov;
    a.diagonal().array() += j * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      if (l.allFinite()) return l;
    }
  }
  throw NumericalError("Cholesky of a " + std::to_string(n) + "x" + std::to_string(n) +
                       " covariance failed at every jitter level up to " +
                       std::to_string(kJitterMax * scale));
}

PriorSampler::PriorSampler(const Eigen::MatrixXd& covariance, double jitter_scale)
    : factor_(jittered_cholesky(covariance, jitter_scale)) {}

Eigen::VectorXd PriorSampler::draw(Rng& rng) const {
  const auto n = factor_.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  return factor_.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd sample_prior(const KernelSpec& kernel, const PointSet& candidates,
                             std::uint64_t seed) {
  if (candidates.empty()) throw ConfigError("sample_prior: candidate set is empty");
  kernel.validate();
  check_dim(kernel, candidates.dim(), "sample_prior");
  PriorSampler sampler(gram_matrix(kernel, candidates), kernel.signal_variance);
  Rng rng(seed);
  return sampler.draw(rng);
}

CandidatePosterior::CandidatePosterior(Eigen::MatrixXd prior_covariance, double noise_variance)
    : cov_(std::move(prior_covariance)), noise_variance_(noise_variance) {
  if (cov_.rows() != cov_.cols() || cov_.rows() == 0) {
    throw ConfigError("candidate prior covariance must be a non-empty square matrix");
  }
  if (!cov_.allFinite()) throw ConfigError("candidate prior covariance is not finite");
  if (!(noise_variance_ >= 0.0) || !std::isfinite(noise_variance_)) {
    throw ConfigError("noise variance must be finite and non-negative");
  }
  const auto n = static_cast<std::size_t>(cov_.rows());
  mean_.assign(n, 0.0);
  variance_.resize(n);
  scratch_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    variance_[j] = std::max(cov_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)), 0.0);
  }
}

CandidatePosterior::CandidatePosterior(const KernelSpec& kernel, const PointSet& candidates,
                                       double noise_variance)
    : CandidatePosterior(gram_matrix(kernel, candidates), noise_variance) {}

void CandidatePosterior::observe(std::size_t j, double y) {
  if (j >= size()) throw ConfigError("candidate index out of range");
  if (!std::isfinite(y)) throw ObservationError("observation is not finite");
  const auto n = static_cast<Eigen::Index>(size());
  const auto jj = static_cast<Eigen::Index>(j);
  const double denom = cov_(jj, jj) + noise_variance_;
  if (!(denom > 0.0)) {
    throw NumericalError("posterior update at candidate " + std::to_string(j) +
                         " has non-positive predictive variance");
  }
  // Sigma <- Sigma - a a^T with a = Sigma[:, j] / sqrt(denom); the product
  // a_i * a_k is symmetric bitwise, so the covariance stays exactly symmetric.
  const double inv_sd = 1.0 / std::sqrt(denom);
  for (Eigen::Index i = 0; i < n; ++i) scratch_[static_cast<std::size_t>(i)] = cov_(i, jj) * inv_sd;
  const auto& ops = simd::active();
  const double resid = (y - mean_[j]) * inv_sd;
  ops.axpy(resid, scratch_.data(), mean_.data(), size());
  for (Eigen::Index k = 0; k < n; ++k) {
    ops.axpy(-scratch_[static_cast<std::size_t>(k)], scratch_.data(), cov_.col(k).data(), size());
  }
  for (Eigen::Index k = 0; k < n; ++k) variance_[static_cast<std::size_t>(k)] = std::max(cov_(k, k), 0.0);
  ++observations_;
}

}  // namespace irgp
