#include "irgp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "irgp/errors.hpp"
#include "irgp/gp.hpp"
#include "irgp/rng.hpp"

namespace irgp {

namespace {

using std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_bound_inputs(long long T, double noise_variance, double gamma) {
  require(T >= 1, "T must be >= 1");
  require(noise_variance > 0.0 && std::isfinite(noise_variance), "noise variance must be positive");
  require(gamma >= 0.0 && std::isfinite(gamma), "information gain must be >= 0");
}

void require_delta(double delta) { require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)"); }

// log(pi^2 T^2 / (3 delta)).
double union_log(long long T, double delta) {
  const double td = static_cast<double>(T);
  return std::log(pi * pi * td * td / (3.0 * delta));
}

// T s_T + T + 2 sqrt(T L) + 2 L: the high-probability envelope of sum zeta_t.
double zeta_envelope(long long T, double s_T, double L) {
  const double td = static_cast<double>(T);
  return td * s_T + td + 2.0 * std::sqrt(td * L) + 2.0 * L;
}

struct Accumulator {
  double sum = 0.0;
  double sumsq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }

  McEstimate estimate() const {
    McEstimate e;
    e.samples = n;
    if (n == 0) return e;
    e.mean = sum / static_cast<double>(n);
    if (n > 1) {
      const double var = std::max(0.0, (sumsq - sum * e.mean) / static_cast<double>(n - 1));
      e.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return e;
  }
};

}  // namespace

RegretCurves regret_metrics(std::span<const double> instantaneous) {
  RegretCurves c;
  c.instantaneous.assign(instantaneous.begin(), instantaneous.end());
  c.cumulative.resize(instantaneous.size());
  c.simple.resize(instantaneous.size());
  double total = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instantaneous.size(); ++i) {
    total += instantaneous[i];
    best = std::min(best, instantaneous[i]);
    c.cumulative[i] = total;
    c.simple[i] = best;
  }
  return c;
}

RegretCurves regret_metrics(const BoTrace& trace) {
  std::vector<double> r;
  r.reserve(trace.records.size());
  for (const auto& rec : trace.records) r.push_back(rec.regret);
  return regret_metrics(r);
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return out;
}

RegretSummary summarize(const std::vector<BoTrace>& traces, long long horizon) {
  require(!traces.empty(), "cannot summarise zero traces");
  std::size_t T = horizon > 0 ? static_cast<std::size_t>(horizon) : traces.front().records.size();
  for (const auto& tr : traces) {
    if (horizon <= 0) T = std::min(T, tr.records.size());
    require(tr.records.size() >= T, "trace shorter than the requested horizon");
  }
  require(T >= 1, "traces are empty");

  const std::size_t n = traces.size();
  RegretSummary s;
  s.horizon = static_cast<long long>(T);
  s.n_reps = n;
  s.mean_curve.resize(T);
  s.stderr_curve.resize(T);
  s.mean_simple_curve.resize(T);
  s.stderr_simple_curve.resize(T);
  std::vector<RegretCurves> curves;
  curves.reserve(n);
  for (const auto& tr : traces) {
    std::vector<double> r(T);
    for (std::size_t t = 0; t < T; ++t) r[t] = tr.records[t].regret;
    curves.push_back(regret_metrics(r));
  }
  std::vector<double> col(n);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) col[i] = curves[i].cumulative[t];
    const auto c = mean_stderr(col);
    s.mean_curve[t] = c.mean;
    s.stderr_curve[t] = c.std_error;
    for (std::size_t i = 0; i < n; ++i) col[i] = curves[i].simple[t];
    const auto m = mean_stderr(col);
    s.mean_simple_curve[t] = m.mean;
    s.stderr_simple_curve[t] = m.std_error;
  }
  s.mean_cumulative = s.mean_curve.back();
  s.stderr_cumulative = s.stderr_curve.back();
  s.mean_simple = s.mean_simple_curve.back();
  s.stderr_simple = s.stderr_simple_curve.back();
  double gain = 0.0;
  for (const auto& tr : traces) {
    for (std::size_t t = 0; t < T; ++t) gain += tr.records[t].info_gain;
  }
  s.mean_information_gain = gain / static_cast<double>(n);
  return s;
}

RegretSummary estimate_bcr(const InstanceSampler& sampler, const BoConfig& config,
                           std::size_t n_reps, std::uint64_t base_seed, unsigned threads) {
  return summarize(successful_traces(run_replications(sampler, config, n_reps, base_seed, threads)));
}

std::vector<double> draw_zeta_sequence(const ConfidenceSchedule& schedule, long long horizon,
                                       std::uint64_t seed) {
  require(horizon >= 1, "horizon must be >= 1");
  std::vector<double> seq(static_cast<std::size_t>(horizon));
  for (long long t = 1; t <= horizon; ++t) {
    Rng rng = Rng::keyed({seed, key_of(Stream::kZetaSequence), static_cast<std::uint64_t>(t)});
    seq[static_cast<std::size_t>(t - 1)] = next_confidence(schedule, t, rng).value;
  }
  return seq;
}

RegretSummary estimate_conditional_regret(const InstanceSampler& sampler, BoConfig config,
                                          std::vector<double> zeta_sequence, std::size_t n_reps,
                                          std::uint64_t base_seed, unsigned threads) {
  config.zeta_sequence = std::move(zeta_sequence);
  return estimate_bcr(sampler, config, n_reps, base_seed, threads);
}

double realized_information_gain(const KernelSpec& kernel, const PointSet& selected,
                                 double noise_variance) {
  require(noise_variance > 0.0, "noise variance must be positive");
  if (selected.empty()) return 0.0;
  Eigen::MatrixXd a = gram_matrix(kernel, selected) / noise_variance;
  a.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("information gain: I + K / noise_variance is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  return l.diagonal().array().log().sum();
}

double sequential_information_gain(const KernelSpec& kernel, const PointSet& selected,
                                   double noise_variance) {
  require(noise_variance > 0.0, "noise variance must be positive");
  GpState state(kernel, noise_variance);
  double gain = 0.0;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const auto x = selected.point(i);
    gain += 0.5 * std::log1p(state.posterior(x).variance / noise_variance);
    state.append(x, 0.0);
  }
  return gain;
}

double greedy_information_gain(const Eigen::MatrixXd& prior_covariance, std::size_t steps,
                               double noise_variance) {
  require(noise_variance > 0.0, "noise variance must be positive");
  CandidatePosterior post(prior_covariance, noise_variance);
  double gain = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto var = post.variance();
    const auto it = std::max_element(var.begin(), var.end());
    gain += 0.5 * std::log1p(*it / noise_variance);
    post.observe(static_cast<std::size_t>(it - var.begin()), 0.0);
  }
  return gain;
}

double greedy_information_gain(const KernelSpec& kernel, const PointSet& candidates,
                               std::size_t steps, double noise_variance) {
  return greedy_information_gain(gram_matrix(kernel, candidates), steps, noise_variance);
}

double constant_c1(double noise_variance) {
  require(noise_variance > 0.0 && std::isfinite(noise_variance), "noise variance must be positive");
  return 2.0 / std::log1p(1.0 / noise_variance);
}

double constant_c2(std::size_t domain_size) {
  require(domain_size >= 2, "domain size must be >= 2");
  return 2.0 + 2.0 * std::log(static_cast<double>(domain_size) / 2.0);
}

double bcr_bound_finite(long long T, std::size_t domain_size, double noise_variance, double gamma) {
  require_bound_inputs(T, noise_variance, gamma);
  return std::sqrt(constant_c1(noise_variance) * constant_c2(domain_size) *
                   static_cast<double>(T) * gamma);
}

double bcr_bound_continuous(long long T, double a, double b, double r, int d,
                            double noise_variance, double gamma) {
  require_bound_inputs(T, noise_variance, gamma);
  const double s_T = shift_continuous(a, b, r, d, T);
  return pi * pi / 6.0 +
         std::sqrt(constant_c1(noise_variance) * static_cast<double>(T) * gamma * (2.0 + s_T));
}

double conditional_bound_u(long long T, double delta, double s_T, double noise_variance,
                           double gamma, bool continuous) {
  require_bound_inputs(T, noise_variance, gamma);
  require_delta(delta);
  require(std::isfinite(s_T), "s_T must be finite");
  const double L = union_log(T, delta);
  const double td = static_cast<double>(T);
  const double value = 6.0 * std::sqrt(td * L) +
                       std::sqrt(constant_c1(noise_variance) * gamma * zeta_envelope(T, s_T, L));
  return continuous ? value + pi * pi / 6.0 : value;
}

double high_prob_bound(long long T, double delta, std::size_t domain_size, double noise_variance,
                       double gamma) {
  require_bound_inputs(T, noise_variance, gamma);
  require_delta(delta);
  const double s_T = shift_high_prob(domain_size, T, delta);
  return 2.0 * std::sqrt(constant_c1(noise_variance) * gamma *
                         zeta_envelope(T, s_T, union_log(T, delta)));
}

double laurent_bound(long long D, double delta) {
  require(D >= 1, "degrees of freedom must be >= 1");
  require_delta(delta);
  const double l = std::log(1.0 / delta);
  const double dd = static_cast<double>(D);
  return dd + 2.0 * std::sqrt(dd * l) + 2.0 * l;
}

double gaussian_tail_bound(double c) {
  require(c > 0.0, "Gaussian tail bound needs c > 0");
  return 0.5 * std::exp(-0.5 * c * c);
}

double gaussian_survival(double c) { return 0.5 * std::erfc(c / std::numbers::sqrt2); }

bool conditional_bound_dominance(long long T, double delta, double s_T) {
  require(T >= 1, "T must be >= 1");
  require_delta(delta);
  return std::min(s_T * s_T / 2.0, s_T) * static_cast<double>(T) > union_log(T, delta);
}

double noise_event_lower_bound() {
  return 1.0 - 1.0 / (2.0 * std::exp(0.5) * (1.0 - std::exp(-0.5)));
}

BoundReport finish_bound_report(BoundReport report) {
  report.slack = report.value + 3.0 * report.target_stderr - report.target;
  report.satisfied = std::isfinite(report.value) && report.slack >= 0.0;
  return report;
}

LemmaCheck validate_lemma_4_2(const KernelSpec& kernel, const PointSet& candidates,
                              const PointSet& data_inputs, std::span<const double> data_outputs,
                              double noise_variance, std::size_t n_mc, std::uint64_t seed) {
  require(!candidates.empty(), "Lemma check needs at least one candidate");
  require(n_mc >= 2, "Lemma check needs n_mc >= 2");
  const auto m = static_cast<Eigen::Index>(candidates.size());

  // Joint posterior over the candidates.
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd cov = gram_matrix(kernel, candidates);
  if (!data_outputs.empty()) {
    const GpState gp = GpState::from_data(kernel, noise_variance, data_inputs, data_outputs);
    const auto n = static_cast<Eigen::Index>(gp.size());
    Eigen::MatrixXd v(n, m);
    std::vector<double> row(candidates.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      kernel_row(kernel, gp.inputs().point(static_cast<std::size_t>(i)), candidates, row);
      v.row(i) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), m);
    }
    const Eigen::MatrixXd l = gp.chol();
    l.triangularView<Eigen::Lower>().solveInPlace(v);
    const Eigen::Map<const Eigen::VectorXd> w(gp.whitened_outputs().data(), n);
    mu = v.transpose() * w;
    cov.noalias() -= v.transpose() * v;
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
  Eigen::VectorXd sd(m);
  for (Eigen::Index j = 0; j < m; ++j) sd[j] = std::sqrt(std::max(cov(j, j), 0.0));
  const Eigen::MatrixXd factor = jittered_cholesky(cov, kernel.signal_variance);

  LemmaCheck out;
  {
    Rng rng = Rng::keyed({seed, key_of(Stream::kMonteCarlo), 0});
    Accumulator acc;
    constexpr std::size_t kBatch = 2048;
    Eigen::MatrixXd z(m, static_cast<Eigen::Index>(kBatch));
    for (std::size_t done = 0; done < n_mc; done += kBatch) {
      const auto b = static_cast<Eigen::Index>(std::min(kBatch, n_mc - done));
      for (Eigen::Index c = 0; c < b; ++c) {
        for (Eigen::Index j = 0; j < m; ++j) z(j, c) = rng.normal();
      }
      Eigen::MatrixXd f = factor.triangularView<Eigen::Lower>() * z.leftCols(b);
      f.colwise() += mu;
      for (Eigen::Index c = 0; c < b; ++c) acc.add(f.col(c).maxCoeff());
    }
    out.lhs = acc.estimate();
  }
  {
    // A single candidate would give a negative shift; the lemma is trivial
    // there, so the shift is clamped at zero.
    const double s = candidates.size() >= 2 ? shift_finite(candidates.size()) : 0.0;
    Rng rng = Rng::keyed({seed, key_of(Stream::kMonteCarlo), 1});
    Accumulator acc;
    for (std::size_t i = 0; i < n_mc; ++i) {
      const double root = std::sqrt(sample_shifted_exponential(s, kShiftedExpRate, rng));
      acc.add((mu.array() + root * sd.array()).maxCoeff());
    }
    out.rhs = acc.estimate();
  }
  const double combined = std::hypot(out.lhs.std_error, out.rhs.std_error);
  out.holds = out.lhs.mean <= out.rhs.mean + 3.0 * combined;
  return out;
}

Eigen::Matrix2d counterexample_covariance(double rho) {
  require(std::isfinite(rho) && rho * rho < 0.99,
          "counterexample needs |rho| < sqrt(0.99) for a positive definite prior");
  Eigen::Matrix2d c;
  c << 1.0, rho, rho, 0.99;
  return c;
}

InstanceSampler counterexample_instance(double rho) {
  const Eigen::Matrix2d cov = counterexample_covariance(rho);
  Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success) throw ConfigError("counterexample covariance is not positive definite");
  const Eigen::Matrix2d l = llt.matrixL();
  auto base = std::make_shared<ProblemInstance>();
  base->candidates.points = PointSet(Eigen::MatrixXd((Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished()));
  base->prior_covariance = Eigen::MatrixXd(cov);
  base->noise_stddev = 1.0;
  base->label = "counterexample(rho=" + std::to_string(rho) + ")";
  return [base, l](std::uint64_t base_seed, std::size_t rep) {
    Rng rng = Rng::keyed({base_seed, static_cast<std::uint64_t>(rep), key_of(Stream::kInstance)});
    Eigen::Vector2d z;
    z[0] = rng.normal();
    z[1] = rng.normal();
    const Eigen::Vector2d f = l * z;
    ProblemInstance inst = *base;
    inst.true_values = {f[0], f[1]};
    set_optimum_from_values(inst);
    return inst;
  };
}

McEstimate noise_event_frequency(long long T, std::size_t n_mc, std::uint64_t seed) {
  require(T >= 1, "T must be >= 1");
  require(n_mc >= 1, "n_mc must be >= 1");
  // One stream per sample, so the estimate at a larger T only removes
  // samples from the event and is exactly monotone across T.
  Accumulator acc;
  for (std::size_t i = 0; i < n_mc; ++i) {
    Rng rng = Rng::keyed({seed, key_of(Stream::kMonteCarlo), static_cast<std::uint64_t>(i)});
    double sum = 0.0;
    bool ok = true;
    for (long long t = 1; t <= T; ++t) {
      sum += rng.normal();
      if (sum < -static_cast<double>(t)) {
        ok = false;
        break;
      }
    }
    acc.add(ok ? 1.0 : 0.0);
  }
  return acc.estimate();
}

McEstimate chi_square_exceedance(long long D, double delta, std::size_t n_mc, std::uint64_t seed) {
  const double bound = laurent_bound(D, delta);
  require(n_mc >= 1, "n_mc must be >= 1");
  Rng rng = Rng::keyed({seed, key_of(Stream::kMonteCarlo), static_cast<std::uint64_t>(D)});
  Accumulator acc;
  for (std::size_t i = 0; i < n_mc; ++i) {
    double q = 0.0;
    for (long long k = 0; k < D; ++k) {
      const double z = rng.normal();
      q += z * z;
    }
    acc.add(q > bound ? 1.0 : 0.0);
  }
  return acc.estimate();
}

std::string_view verdict_name(SlopeVerdict v) noexcept {
  switch (v) {
    case SlopeVerdict::kLinear:
      return "linear-consistent";
    case SlopeVerdict::kSublinear:
      return "sublinear-consistent";
    case SlopeVerdict::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

SlopeTest regret_slope_test(const RegretSummary& at_t1, const RegretSummary& at_t2,
                            double linear_threshold, double sublinear_threshold) {
  require(sublinear_threshold <= linear_threshold,
          "sublinear threshold must not exceed the linear threshold");
  SlopeTest out{kNaN, SlopeVerdict::kInconclusive};
  if (at_t1.horizon <= 0 || at_t2.horizon <= 0) return out;
  const double rate1 = at_t1.mean_cumulative / static_cast<double>(at_t1.horizon);
  const double rate2 = at_t2.mean_cumulative / static_cast<double>(at_t2.horizon);
  if (rate1 == 0.0 || !std::isfinite(rate1) || !std::isfinite(rate2)) return out;
  out.ratio = rate2 / rate1;
  if (out.ratio >= linear_threshold) {
    out.verdict = SlopeVerdict::kLinear;
  } else if (out.ratio <= sublinear_threshold) {
    out.verdict = SlopeVerdict::kSublinear;
  }
  return out;
}

}  // namespace irgp
