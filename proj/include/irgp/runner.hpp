#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irgp/analysis.hpp"
#include "irgp/config.hpp"
#include "irgp/confidence.hpp"
#include "irgp/engine.hpp"

namespace irgp {

std::string_view software_version() noexcept;

// One entry of the algorithm roster with its fully resolved engine config.
struct AlgorithmRun {
  std::string label;
  BoConfig config;
};

// Problem facts the roster depends on.
struct ProblemShape {
  std::size_t domain_size = 0;
  std::size_t dim = 0;
  bool heuristic = false;
};

std::vector<AlgorithmRun> resolve_algorithms(const ExperimentConfig& config,
                                             const ProblemShape& shape);

struct ExperimentOptions {
  std::filesystem::path out_dir;
  bool overwrite = false;
  std::ostream* log = nullptr;
};

struct ExperimentOutcome {
  std::vector<std::filesystem::path> files;
  // False when a bound or verdict embedded in the run did not hold.
  bool checks_passed = true;
};

// Runs the experiment and writes traces_<alg>.csv, summary.csv, bounds.json
// and manifest.json (plus kind-specific tables) into options.out_dir. Refuses
// a non-empty directory unless options.overwrite is set.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const ExperimentOptions& options);

// config.output_dir if set, else $IRGP_OUTPUT_ROOT (or "irgp-runs") joined
// with the stem of the config file.
std::filesystem::path default_output_dir(const ExperimentConfig& config,
                                         const std::filesystem::path& config_path);

// ---- writers --------------------------------------------------------------

std::string format_number(double v);

void write_traces_csv(const std::vector<BoTrace>& traces, std::ostream& out);
// Header: algorithm,t,mean_Rt,stderr_Rt,mean_simple,stderr_simple
void write_summary_header(std::ostream& out);
void write_summary_rows(std::string_view algorithm, const RegretSummary& summary, std::ostream& out);

struct NamedSchedule {
  std::string name;
  ConfidenceSchedule schedule;
};

// GP-UCB, RGP-UCB and IRGP-UCB schedules at config.profile_domain_size.
std::vector<NamedSchedule> profile_schedules(const ExperimentConfig& config);

// Rows: schedule,t,mean,q025,q975. Deterministic schedules repeat beta_t in
// all three columns.
void emit_confidence_profile(std::span<const NamedSchedule> schedules, long long T,
                             std::ostream& out);

// ---- verification suites -------------------------------------------------

struct LemmaCase {
  std::size_t id = 0;
  KernelSpec kernel;
  PointSet candidates;
  PointSet data_inputs;
  std::vector<double> data_outputs;
};

// Random configurations: dimension 1-3, grid sizes 2..max_grid, datasets
// 0..max_data points, kernel family cycling SE, Matern 5/2, Matern 3/2.
std::vector<LemmaCase> lemma_sweep(std::size_t n_configs, std::size_t max_grid,
                                   std::size_t max_data, double noise_variance,
                                   std::uint64_t seed);

struct LemmaRow {
  LemmaCase setup;
  LemmaCheck check;
};

std::vector<LemmaRow> run_lemma_sweep(const std::vector<LemmaCase>& cases, double noise_variance,
                                      std::size_t n_mc, std::uint64_t seed, unsigned threads = 0);

void write_lemma_csv(const std::vector<LemmaRow>& rows, std::ostream& out);

// "lemma42", "counterexample" or "bounds". Prints a report to `log` and
// returns true when every check passed. Throws ConfigError on other names.
bool run_check(std::string_view name, bool quick, std::ostream& log);

}  // namespace irgp
