#include "irgp/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "irgp/errors.hpp"
#include "irgp/simd/ops.hpp"

namespace irgp {

namespace {

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

void require_candidates(std::size_t n) {
  if (n == 0) throw ConfigError("candidate set is empty");
}

void require_aligned(std::span<const double> mean, std::span<const double> variance) {
  require_candidates(mean.size());
  if (mean.size() != variance.size()) {
    throw ConfigError("posterior mean and variance arrays differ in length");
  }
}

template <class Score>
Selection argmax_by(std::size_t n, Score score) {
  Selection best{0, score(0)};
  for (std::size_t j = 1; j < n; ++j) {
    const double s = score(j);
    if (s > best.score || (std::isnan(best.score) && !std::isnan(s))) best = {j, s};
  }
  return best;
}

double sd(double variance) noexcept { return variance > 0.0 ? std::sqrt(variance) : 0.0; }

void posterior_arrays(const GpState& state, const CandidateSet& candidates,
                      std::vector<double>& mean, std::vector<double>& variance) {
  require_candidates(candidates.size());
  mean.resize(candidates.size());
  variance.resize(candidates.size());
  state.posterior_batch(candidates.points, mean, variance);
}

}  // namespace

Selection ucb_argmax(std::span<const double> mean, std::span<const double> variance,
                     double confidence) {
  require_aligned(mean, variance);
  if (!(confidence >= 0.0)) throw ConfigError("UCB confidence must be >= 0");
  Selection s;
  s.index = simd::active().ucb_argmax(mean.data(), variance.data(), std::sqrt(confidence),
                                      mean.size(), &s.score);
  return s;
}

double expected_improvement(double mu, double sigma, double incumbent) noexcept {
  const double gap = mu - incumbent;
  if (!(sigma > 0.0)) return gap > 0.0 ? gap : 0.0;
  const double z = gap / sigma;
  return gap * normal_cdf(z) + sigma * normal_pdf(z);
}

double improvement_probability(double mu, double sigma, double threshold) noexcept {
  if (!(sigma > 0.0)) return mu >= threshold ? 1.0 : 0.0;
  return normal_cdf((mu - threshold) / sigma);
}

Selection ei_argmax(std::span<const double> mean, std::span<const double> variance,
                    double incumbent) {
  require_aligned(mean, variance);
  return argmax_by(mean.size(), [&](std::size_t j) {
    return expected_improvement(mean[j], sd(variance[j]), incumbent);
  });
}

Selection pi_argmax(std::span<const double> mean, std::span<const double> variance,
                    double threshold) {
  require_aligned(mean, variance);
  return argmax_by(mean.size(), [&](std::size_t j) {
    return improvement_probability(mean[j], sd(variance[j]), threshold);
  });
}

Selection max_entry(std::span<const double> values) {
  require_candidates(values.size());
  return argmax_by(values.size(), [&](std::size_t j) { return values[j]; });
}

Selection ucb_select(const GpState& state, const CandidateSet& candidates, double confidence) {
  std::vector<double> mean, variance;
  posterior_arrays(state, candidates, mean, variance);
  return ucb_argmax(mean, variance, confidence);
}

Selection ei_select(const GpState& state, const CandidateSet& candidates, double incumbent) {
  std::vector<double> mean, variance;
  posterior_arrays(state, candidates, mean, variance);
  return ei_argmax(mean, variance, incumbent);
}

Eigen::VectorXd RffModel::features(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(frequencies.cols())) {
    throw ConfigError("RFF feature input has the wrong dimension");
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  return scale * (frequencies * xv + phases).array().cos().matrix();
}

Eigen::MatrixXd RffModel::features(const PointSet& points) const {
  if (points.dim() != static_cast<std::size_t>(frequencies.cols())) {
    throw ConfigError("RFF feature input has the wrong dimension");
  }
  Eigen::MatrixXd arg = points.matrix() * frequencies.transpose();
  arg.rowwise() += phases.transpose();
  return scale * arg.array().cos().matrix();
}

double RffModel::approx_kernel(std::span<const double> x, std::span<const double> x2) const {
  return features(x).dot(features(x2));
}

Eigen::VectorXd RffModel::evaluate(const PointSet& points, const Eigen::VectorXd& weights) const {
  if (points.empty()) return Eigen::VectorXd();
  // Chunked to bound the feature-matrix footprint on large candidate sets.
  constexpr std::size_t kChunk = 512;
  const std::size_t n = points.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  const Eigen::MatrixXd all = points.matrix();
  for (std::size_t lo = 0; lo < n; lo += kChunk) {
    const auto len = static_cast<Eigen::Index>(std::min(kChunk, n - lo));
    Eigen::MatrixXd arg = all.middleRows(static_cast<Eigen::Index>(lo), len) * frequencies.transpose();
    arg.rowwise() += phases.transpose();
    out.segment(static_cast<Eigen::Index>(lo), len) = scale * (arg.array().cos().matrix() * weights);
  }
  return out;
}

RffModel build_rff(const KernelSpec& kernel, std::size_t num_features, std::uint64_t seed) {
  kernel.validate();
  if (num_features == 0) throw ConfigError("RFF needs at least one feature");
  double nu = 0.0;
  switch (kernel.family) {
    case KernelFamily::kSquaredExponential:
      break;
    case KernelFamily::kMatern52:
      nu = 2.5;
      break;
    case KernelFamily::kMatern32:
      nu = 1.5;
      break;
    default:
      throw ConfigError("RFF: unsupported kernel family");
  }

  const auto m = static_cast<Eigen::Index>(num_features);
  const auto d = static_cast<Eigen::Index>(kernel.dim());
  RffModel rff{kernel, num_features, Eigen::MatrixXd(m, d), Eigen::VectorXd(m),
               std::sqrt(2.0 * kernel.signal_variance / static_cast<double>(num_features))};
  Rng rng(seed);
  for (Eigen::Index i = 0; i < m; ++i) {
    double t_scale = 1.0;
    if (nu > 0.0) {
      // chi-square with 2 nu dof is Gamma(nu, 2).
      std::gamma_distribution<double> chi2(nu, 2.0);
      Rng child = rng.split();
      t_scale = std::sqrt(2.0 * nu / chi2(child));
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      rff.frequencies(i, k) = rng.normal() * t_scale / kernel.lengthscales[static_cast<std::size_t>(k)];
    }
    rff.phases[i] = 2.0 * std::numbers::pi * rng.uniform();
  }
  return rff;
}

Eigen::VectorXd sample_posterior_weights(const RffModel& rff, const PointSet& inputs,
                                         std::span<const double> outputs, double noise_variance,
                                         Rng& rng) {
  const auto m = static_cast<Eigen::Index>(rff.num_features);
  if (m == 0) throw ConfigError("RFF needs at least one feature");
  if (inputs.size() != outputs.size()) throw ConfigError("inputs and outputs differ in length");
  Eigen::VectorXd w0(m);
  for (Eigen::Index i = 0; i < m; ++i) w0[i] = rng.normal();
  const auto n = static_cast<Eigen::Index>(outputs.size());
  if (n == 0) return w0;

  const Eigen::MatrixXd phi = rff.features(inputs);  // n x M
  const Eigen::Map<const Eigen::VectorXd> y(outputs.data(), n);
  const double noise_sd = std::sqrt(noise_variance);

  if (n < m) {
    // Pathwise conditioning: w = w0 + phi^T (phi phi^T + s2 I)^{-1} (y - phi w0 - eps0).
    Eigen::VectorXd eps0(n);
    for (Eigen::Index i = 0; i < n; ++i) eps0[i] = noise_sd * rng.normal();
    Eigen::MatrixXd gram = phi * phi.transpose();
    gram.diagonal().array() += noise_variance;
    const Eigen::MatrixXd l = jittered_cholesky(gram, rff.kernel.signal_variance);
    Eigen::VectorXd resid = y - phi * w0 - eps0;
    l.triangularView<Eigen::Lower>().solveInPlace(resid);
    l.transpose().triangularView<Eigen::Upper>().solveInPlace(resid);
    return w0 + phi.transpose() * resid;
  }

  // Weight space: A = phi^T phi / s2 + I, w = A^{-1} phi^T y / s2 + L^{-T} z.
  if (!(noise_variance > 0.0)) {
    throw NumericalError("weight-space RFF posterior needs a positive noise variance");
  }
  Eigen::MatrixXd a = phi.transpose() * phi / noise_variance;
  a.diagonal().array() += 1.0;
  const Eigen::MatrixXd l = jittered_cholesky(a, 1.0);
  Eigen::VectorXd mean = phi.transpose() * y / noise_variance;
  l.triangularView<Eigen::Lower>().solveInPlace(mean);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(mean);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(w0);
  return mean + w0;
}

Eigen::VectorXd sample_posterior_path(const GpState& state, const RffModel& rff,
                                      std::uint64_t seed) {
  Rng rng(seed);
  return sample_posterior_weights(rff, state.inputs(), state.outputs(), state.noise_variance(),
                                  rng);
}

std::size_t ts_select(const GpState& state, const RffModel& rff,
                      const CandidateSet& candidates, std::uint64_t seed) {
  require_candidates(candidates.size());
  const Eigen::VectorXd path = rff.evaluate(candidates.points, sample_posterior_path(state, rff, seed));
  return max_entry(std::span<const double>(path.data(), candidates.size())).index;
}

std::size_t pims_select(const GpState& state, const RffModel& rff,
                        const CandidateSet& candidates, std::uint64_t seed) {
  require_candidates(candidates.size());
  const Eigen::VectorXd path = rff.evaluate(candidates.points, sample_posterior_path(state, rff, seed));
  const double f_star = path.maxCoeff();
  std::vector<double> mean, variance;
  posterior_arrays(state, candidates, mean, variance);
  return pi_argmax(mean, variance, f_star).index;
}

}  // namespace irgp
