#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irgp/kernel.hpp"

namespace irgp {

enum class ExperimentKind {
  kSyntheticBcr,
  kConditionalRegret,
  kBenchmark,
  kTabular,
  kCounterexample,
  kLemmaCheck,
  kBoundSweep,
};

std::string_view kind_name(ExperimentKind kind) noexcept;

// How the named UCB algorithms pick their schedule: the theoretical
// finite-domain forms or the dimension-only heuristics.
enum class ScheduleMode { kAuto, kTheory, kHeuristic };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSyntheticBcr;
  std::vector<std::string> algorithms{"irgp-ucb"};
  long long horizon = 200;
  std::vector<long long> horizons;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string output_dir;

  KernelFamily kernel_family = KernelFamily::kSquaredExponential;
  std::vector<double> lengthscales{0.1};
  double signal_variance = 1.0;
  double noise_variance = 1e-4;

  double grid_low = 0.0;
  double grid_high = 0.9;
  std::size_t grid_count = 10;
  std::size_t grid_dim = 3;

  std::optional<std::size_t> init_size;
  std::vector<std::size_t> init_indices;

  ScheduleMode schedule_mode = ScheduleMode::kAuto;
  double delta = 0.1;
  double theta = 1.0;
  std::vector<double> constants{1.0};
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> r;

  std::size_t rff_features = 2000;
  std::size_t candidates = 2000;

  std::size_t refit_period = 0;
  std::vector<double> refit_lengthscales;
  std::vector<double> refit_signal_variances;

  std::string benchmark_function;
  std::size_t benchmark_dim = 0;

  std::string tabular_path;
  std::string tabular_objective;

  double rho = 0.0;
  std::size_t zeta_sequences = 10;

  std::size_t lemma_configs = 50;
  std::size_t lemma_samples = 100000;
  std::size_t lemma_max_grid = 50;
  std::size_t lemma_max_data = 20;

  bool greedy_gain = false;

  std::size_t profile_domain_size = 1000;

  bool operator==(const ExperimentConfig&) const = default;

  // The kernel implied by the config for a d-dimensional problem.
  KernelSpec kernel(std::size_t dim) const;
  // horizons if set, otherwise {horizon}; sorted, largest last.
  std::vector<long long> report_horizons() const;
};

struct ConfigIssue {
  std::string key;
  std::string message;
};

// Parses the flat `key = value` format. Collects every problem; throws
// ConfigError listing all of them.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

// Parses and validates without throwing; an empty vector means success.
std::vector<ConfigIssue> check_config(std::string_view text, ExperimentConfig* out = nullptr);

// Canonical text form: every key, one per line, doubles printed with 17
// significant digits so that parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// Every key accepted by the parser.
const std::vector<std::string>& config_keys();

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace irgp
