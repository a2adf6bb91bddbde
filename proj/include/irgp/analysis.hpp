#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "irgp/confidence.hpp"
#include "irgp/engine.hpp"
#include "irgp/kernel.hpp"
#include "irgp/points.hpp"

namespace irgp {

// ---- regret -------------------------------------------------------------

struct RegretCurves {
  std::vector<double> instantaneous;
  std::vector<double> cumulative;
  std::vector<double> simple;  // min_{s <= t} r_s
};

RegretCurves regret_metrics(std::span<const double> instantaneous);
RegretCurves regret_metrics(const BoTrace& trace);

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

// Sample mean and sample standard deviation / sqrt(n) (0 when n = 1).
MeanStderr mean_stderr(std::span<const double> values);

struct RegretSummary {
  long long horizon = 0;
  std::size_t n_reps = 0;
  double mean_cumulative = 0.0;
  double stderr_cumulative = 0.0;
  double mean_simple = 0.0;
  double stderr_simple = 0.0;
  // Indexed by t - 1.
  std::vector<double> mean_curve;
  std::vector<double> stderr_curve;
  std::vector<double> mean_simple_curve;
  std::vector<double> stderr_simple_curve;
  double mean_information_gain = 0.0;
};

// Summary over the first `horizon` rounds of every trace (0 = full length;
// all traces must be at least that long).
RegretSummary summarize(const std::vector<BoTrace>& traces, long long horizon = 0);

RegretSummary estimate_bcr(const InstanceSampler& sampler, const BoConfig& config,
                           std::size_t n_reps, std::uint64_t base_seed, unsigned threads = 0);

// zeta_1..zeta_T drawn once from the schedule with the stream
// (seed, Stream::kZetaSequence, t).
std::vector<double> draw_zeta_sequence(const ConfidenceSchedule& schedule, long long horizon,
                                       std::uint64_t seed);

// Expected regret over f and noise with the confidence sequence held fixed.
RegretSummary estimate_conditional_regret(const InstanceSampler& sampler, BoConfig config,
                                          std::vector<double> zeta_sequence, std::size_t n_reps,
                                          std::uint64_t base_seed, unsigned threads = 0);

// ---- information gain ----------------------------------------------------

// 0.5 log det(I + K_A / noise_variance).
double realized_information_gain(const KernelSpec& kernel, const PointSet& selected,
                                 double noise_variance);
// 0.5 sum_t log(1 + sigma_{t-1}^2(x_t) / noise_variance).
double sequential_information_gain(const KernelSpec& kernel, const PointSet& selected,
                                   double noise_variance);
// Greedy maximisation of the information gain over `steps` picks from the
// candidates (with repetition); a practical stand-in for the maximum.
double greedy_information_gain(const KernelSpec& kernel, const PointSet& candidates,
                               std::size_t steps, double noise_variance);
double greedy_information_gain(const Eigen::MatrixXd& prior_covariance, std::size_t steps,
                               double noise_variance);

// ---- closed-form bounds --------------------------------------------------

double constant_c1(double noise_variance);
double constant_c2(std::size_t domain_size);
double bcr_bound_finite(long long T, std::size_t domain_size, double noise_variance, double gamma);
double bcr_bound_continuous(long long T, double a, double b, double r, int d,
                            double noise_variance, double gamma);
double conditional_bound_u(long long T, double delta, double s_T, double noise_variance,
                           double gamma, bool continuous);
double high_prob_bound(long long T, double delta, std::size_t domain_size, double noise_variance,
                       double gamma);
double laurent_bound(long long D, double delta);
double gaussian_tail_bound(double c);
// 1 - Phi(c).
double gaussian_survival(double c);
// min{s_T^2 / 2, s_T} T > log(pi^2 T^2 / (3 delta)), under which the T s_T
// term dominates U(T, delta).
bool conditional_bound_dominance(long long T, double delta, double s_T);
// 1 - 1 / (2 e^{1/2} (1 - e^{-1/2})), the lower bound on the probability that
// every running noise average stays >= -1.
double noise_event_lower_bound();

struct BoundReport {
  std::string name;
  long long T = 0;
  std::size_t domain_size = 0;
  double noise_variance = 0.0;
  double delta = 0.0;  // NaN when unused
  double s_T = 0.0;    // NaN when unused
  double gamma = 0.0;
  double value = 0.0;
  double target = 0.0;
  double target_stderr = 0.0;
  bool satisfied = false;
  // value + 3 stderr - target (positive when satisfied).
  double slack = 0.0;
};

// Fills satisfied/slack using the one-sided 3-standard-error rule.
BoundReport finish_bound_report(BoundReport report);

// ---- Monte-Carlo checks --------------------------------------------------

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct LemmaCheck {
  McEstimate lhs;  // E[max_x f(x)] under the posterior
  McEstimate rhs;  // E[max_x mu(x) + sqrt(zeta) sigma(x)]
  bool holds = false;  // lhs <= rhs + 3 combined standard errors
};

LemmaCheck validate_lemma_4_2(const KernelSpec& kernel, const PointSet& candidates,
                              const PointSet& data_inputs, std::span<const double> data_outputs,
                              double noise_variance, std::size_t n_mc, std::uint64_t seed);

// Covariance [[1, rho], [rho, 0.99]]; throws ConfigError unless |rho| < sqrt(0.99).
Eigen::Matrix2d counterexample_covariance(double rho);

// Two candidates with that prior and unit noise; each replication draws
// (f(x1), f(x2)) jointly from the stream (base_seed, rep, Stream::kInstance).
InstanceSampler counterexample_instance(double rho);

// Pr(for all t <= T: mean of t standard normals >= -1).
McEstimate noise_event_frequency(long long T, std::size_t n_mc, std::uint64_t seed);

// Frequency with which chi-square(D) draws exceed laurent_bound(D, delta).
McEstimate chi_square_exceedance(long long D, double delta, std::size_t n_mc, std::uint64_t seed);

enum class SlopeVerdict { kLinear, kSublinear, kInconclusive };

std::string_view verdict_name(SlopeVerdict v) noexcept;

struct SlopeTest {
  double ratio = 0.0;  // NaN when undefined
  SlopeVerdict verdict = SlopeVerdict::kInconclusive;
};

// ratio = (BCR_T2 / T2) / (BCR_T1 / T1).
SlopeTest regret_slope_test(const RegretSummary& at_t1, const RegretSummary& at_t2,
                            double linear_threshold = 0.8, double sublinear_threshold = 0.6);

}  // namespace irgp
