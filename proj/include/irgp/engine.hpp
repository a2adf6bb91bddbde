#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "irgp/acquisition.hpp"
#include "irgp/confidence.hpp"
#include "irgp/kernel.hpp"

namespace irgp {

// One optimisation problem. Finite mode carries the ground truth for every
// candidate; benchmark mode carries an analytic objective evaluated on the
// original domain while the model works on the unit cube.
struct ProblemInstance {
  CandidateSet candidates;
  std::vector<double> true_values;
  // Objective on original-domain coordinates (benchmark mode).
  std::function<double(std::span<const double>)> objective;
  // Per-coordinate map from the unit cube: x_orig = lower + x * (upper - lower).
  std::vector<double> lower;
  std::vector<double> upper;
  // Replaces the kernel Gram matrix as the model prior over the candidates.
  std::optional<Eigen::MatrixXd> prior_covariance;
  double optimum_value = 0.0;
  std::size_t optimum_index = 0;
  double noise_stddev = 0.0;
  std::string label;

  bool finite() const noexcept { return !true_values.empty(); }
  std::size_t dim() const noexcept { return candidates.dim(); }

  // Throws ConfigError when the invariants do not hold.
  void validate() const;

  std::vector<double> to_original(std::span<const double> unit) const;
  double value_at(std::span<const double> unit) const;
};

// Sets optimum_value/optimum_index from true_values (first maximiser).
void set_optimum_from_values(ProblemInstance& instance);

enum class AcquisitionKind { kUcb, kEi, kTs, kPims };

std::string_view acquisition_name(AcquisitionKind kind) noexcept;
AcquisitionKind parse_acquisition(std::string_view name);

struct BoConfig {
  AcquisitionKind acquisition = AcquisitionKind::kUcb;
  ConfidenceSchedule schedule{schedule::Constant{1.0}};
  KernelSpec kernel;
  // Noise variance assumed by the model.
  double noise_variance = 1e-4;
  long long horizon = 1;
  // Finite mode: explicit initial indices take precedence over initial_size.
  std::vector<std::size_t> initial_indices;
  // Random initial design size; unset means 2^d.
  std::optional<std::size_t> initial_size;
  // Hyperparameters are refitted before iterations 1, 1 + p, 1 + 2p, ...
  std::size_t refit_period = 0;
  std::vector<KernelSpec> refit_grid;
  std::size_t rff_features = 2000;
  // Replaces the schedule draws (conditional regret experiments).
  std::optional<std::vector<double>> zeta_sequence;

  void validate() const;
};

struct TraceRecord {
  long long t = 0;
  std::size_t index = 0;  // candidate index (finite mode) or 0
  std::vector<double> x;  // model coordinates
  double zeta = 0.0;      // NaN when the acquisition has no confidence parameter
  double shift = 0.0;
  double y = 0.0;
  double f = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double regret = 0.0;
  double cumulative = 0.0;
  // 0.5 * log(1 + sigma_{t-1}^2(x_t) / noise_variance)
  double info_gain = 0.0;
};

struct BoTrace {
  std::size_t replication = 0;
  double optimum_value = 0.0;
  std::size_t initial_size = 0;
  std::vector<TraceRecord> records;

  double cumulative_regret() const noexcept;
  // Sum of the per-iteration information-gain increments.
  double information_gain() const noexcept;
  std::vector<std::size_t> selected_indices() const;
};

// Runs the initial design followed by exactly config.horizon acquisition
// rounds. Every random quantity comes from a stream keyed by
// (base_seed, replication, purpose[, t]).
BoTrace run_bo(const ProblemInstance& instance, const BoConfig& config, std::uint64_t base_seed,
               std::size_t replication = 0);

using InstanceSampler = std::function<ProblemInstance(std::uint64_t base_seed, std::size_t rep)>;

// Reuses one instance for every replication.
InstanceSampler fixed_instance(ProblemInstance instance);

struct ReplicationResult {
  std::size_t replication = 0;
  std::optional<BoTrace> trace;
  std::string error;
};

// Replications run on `threads` workers (0 = hardware concurrency). Failures
// are recorded per replication; throws Error when every replication fails.
std::vector<ReplicationResult> run_replications(const InstanceSampler& sampler,
                                                const BoConfig& config, std::size_t n_reps,
                                                std::uint64_t base_seed, unsigned threads = 0);

// Successful traces only, in replication order.
std::vector<BoTrace> successful_traces(const std::vector<ReplicationResult>& results);

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace irgp
