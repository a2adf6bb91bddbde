#include "irgp/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "irgp/bench.hpp"
#include "irgp/errors.hpp"
#include "irgp/gp.hpp"
#include "irgp/rng.hpp"
#include "irgp/simd/ops.hpp"

#ifndef IRGP_VERSION
#define IRGP_VERSION "0.0.0"
#endif

namespace irgp {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Problem {
  InstanceSampler sampler;
  ProblemShape shape;
  KernelSpec kernel;
  double model_noise = 0.0;
  PointSet candidates;  // finite problems only
};

struct AlgorithmResult {
  std::string label;
  BoConfig config;
  std::vector<BoTrace> traces;
  std::vector<std::pair<std::size_t, std::string>> failures;
};

void say(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n' << std::flush;
}

std::string label_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

bool heuristic_mode(const ExperimentConfig& c) {
  switch (c.schedule_mode) {
    case ScheduleMode::kTheory: return false;
    case ScheduleMode::kHeuristic: return true;
    default: return c.kind == ExperimentKind::kBenchmark || c.kind == ExperimentKind::kTabular;
  }
}

Problem build_problem(const ExperimentConfig& c) {
  Problem p;
  p.model_noise = c.noise_variance;
  const double noise_sd = std::sqrt(c.noise_variance);
  switch (c.kind) {
    case ExperimentKind::kSyntheticBcr:
    case ExperimentKind::kConditionalRegret:
    case ExperimentKind::kBoundSweep: {
      const auto grid = GridSpec::uniform(c.grid_low, c.grid_high, c.grid_count, c.grid_dim);
      p.kernel = c.kernel(c.grid_dim);
      p.candidates = make_grid(grid);
      p.sampler = synthetic_sampler(p.kernel, p.candidates, noise_sd);
      p.shape = {p.candidates.size(), c.grid_dim, heuristic_mode(c)};
      break;
    }
    case ExperimentKind::kBenchmark: {
      const auto fn = parse_benchmark(c.benchmark_function);
      const auto& info = benchmark_info(fn);
      const std::size_t dim = c.benchmark_dim ? c.benchmark_dim : info.dim;
      if (dim == 0) throw ConfigError("benchmark.dim: required for " + std::string(info.name));
      p.kernel = c.kernel(dim);
      p.sampler = fixed_instance(make_benchmark_instance(fn, dim, c.candidates, noise_sd));
      p.shape = {c.candidates, dim, heuristic_mode(c)};
      break;
    }
    case ExperimentKind::kTabular: {
      auto problem = ingest_tabular(c.tabular_path, c.tabular_objective, noise_sd);
      const std::size_t dim = problem.instance.dim();
      p.kernel = c.kernel(dim);
      p.candidates = problem.instance.candidates.points;
      p.shape = {p.candidates.size(), dim, heuristic_mode(c)};
      p.sampler = fixed_instance(std::move(problem.instance));
      break;
    }
    case ExperimentKind::kCounterexample:
      // The construction fixes unit observation noise; the model matches it.
      p.model_noise = 1.0;
      p.kernel = KernelSpec::isotropic(KernelFamily::kSquaredExponential, 1.0, 1);
      p.sampler = counterexample_instance(c.rho);
      p.shape = {2, 1, heuristic_mode(c)};
      break;
    case ExperimentKind::kLemmaCheck:
      break;
  }
  return p;
}

BoConfig base_bo_config(const ExperimentConfig& c, const Problem& p) {
  BoConfig b;
  b.kernel = p.kernel;
  b.noise_variance = p.model_noise;
  b.horizon = c.report_horizons().back();
  b.initial_indices = c.init_indices;
  b.initial_size = c.init_size;
  if (c.kind == ExperimentKind::kCounterexample && !c.init_size && c.init_indices.empty()) {
    b.initial_size = 0;
  }
  b.refit_period = c.refit_period;
  if (c.refit_period > 0) {
    const std::vector<double> variances =
        c.refit_signal_variances.empty() ? std::vector<double>{c.signal_variance}
                                         : c.refit_signal_variances;
    for (double sv : variances) {
      for (double l : c.refit_lengthscales) {
        b.refit_grid.push_back(KernelSpec::isotropic(c.kernel_family, l, p.shape.dim, sv));
      }
    }
  }
  b.rff_features = c.rff_features;
  return b;
}

std::vector<AlgorithmRun> resolve_with(const ExperimentConfig& c, const ProblemShape& shape,
                                       const BoConfig& base) {
  std::vector<AlgorithmRun> out;
  const int d = static_cast<int>(shape.dim);
  const std::size_t n = shape.domain_size;
  auto ucb = [&](std::string label, ConfidenceSchedule::Variant s) {
    AlgorithmRun run{std::move(label), base};
    run.config.acquisition = AcquisitionKind::kUcb;
    run.config.schedule = ConfidenceSchedule(std::move(s));
    out.push_back(std::move(run));
  };
  for (const auto& name : c.algorithms) {
    if (name == "gp-ucb") {
      if (shape.heuristic) {
        ucb(name, schedule::HeuristicUcb{d});
      } else {
        ucb(name, schedule::DeterministicUcb{n, c.delta});
      }
    } else if (name == "rgp-ucb") {
      if (shape.heuristic) {
        ucb(name, schedule::HeuristicGamma{d, c.theta});
      } else {
        ucb(name, schedule::GammaRandomized{n, c.theta});
      }
    } else if (name == "irgp-ucb") {
      if (shape.heuristic) {
        ucb(name, schedule::HeuristicShiftedExp{d});
      } else {
        ucb(name, schedule::ShiftedExpFinite{n});
      }
    } else if (name == "irgp-ucb-hp") {
      ucb(name, schedule::ShiftedExpHighProb{n, c.delta});
    } else if (name == "irgp-ucb-continuous") {
      if (!(c.a && c.b && c.r)) {
        throw ConfigError("irgp-ucb-continuous needs schedule.a, schedule.b and schedule.r");
      }
      ucb(name, schedule::ShiftedExpContinuous{*c.a, *c.b, *c.r, d});
    } else if (name == "ucb-constant") {
      for (double v : c.constants) ucb("ucb-constant-" + label_number(v), schedule::Constant{v});
    } else {
      AlgorithmRun run{name, base};
      run.config.acquisition = parse_acquisition(name);
      out.push_back(std::move(run));
    }
  }
  return out;
}

std::vector<AlgorithmResult> run_roster(const ExperimentConfig& c, const Problem& p,
                                        std::ostream* log) {
  std::vector<AlgorithmResult> results;
  for (auto& run : resolve_with(c, p.shape, base_bo_config(c, p))) {
    say(log, "running " + run.label + " (" + std::to_string(c.reps) + " replications, T = " +
                 std::to_string(run.config.horizon) + ")");
    const auto reps = run_replications(p.sampler, run.config, c.reps, c.seed, c.threads);
    AlgorithmResult r{run.label, run.config, successful_traces(reps), {}};
    for (const auto& rep : reps) {
      if (!rep.trace) r.failures.emplace_back(rep.replication, rep.error);
    }
    if (!r.failures.empty()) {
      say(log, "  " + std::to_string(r.failures.size()) + " replication(s) failed");
    }
    results.push_back(std::move(r));
  }
  return results;
}

double prefix_gain(const BoTrace& trace, long long T) {
  double g = 0.0;
  for (long long t = 0; t < T; ++t) g += trace.records[static_cast<std::size_t>(t)].info_gain;
  return g;
}

double prefix_regret(const BoTrace& trace, long long T) {
  return trace.records[static_cast<std::size_t>(T - 1)].cumulative;
}

json report_json(const BoundReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"name", r.name},
              {"T", r.T},
              {"domain_size", r.domain_size},
              {"noise_variance", num(r.noise_variance)},
              {"delta", num(r.delta)},
              {"s_T", num(r.s_T)},
              {"gamma", num(r.gamma)},
              {"value", num(r.value)},
              {"target", num(r.target)},
              {"target_stderr", num(r.target_stderr)},
              {"satisfied", r.satisfied},
              {"slack", num(r.slack)}};
}

// Bound reports a finished run supports, keyed by the schedule it used.
std::vector<BoundReport> run_bounds(const AlgorithmResult& r, const ExperimentConfig& c,
                                    const Problem& p) {
  std::vector<BoundReport> out;
  if (r.traces.empty() || r.config.acquisition != AcquisitionKind::kUcb) return out;
  const auto& v = r.config.schedule.variant();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (long long T : c.report_horizons()) {
    const auto s = summarize(r.traces, T);
    BoundReport rep;
    rep.T = T;
    rep.domain_size = p.shape.domain_size;
    rep.noise_variance = r.config.noise_variance;
    rep.delta = nan;
    rep.s_T = nan;
    rep.gamma = s.mean_information_gain;
    rep.target = s.mean_cumulative;
    rep.target_stderr = s.stderr_cumulative;
    if (std::holds_alternative<schedule::ShiftedExpFinite>(v)) {
      rep.name = r.label + ":bcr_finite";
      rep.s_T = schedule_shift(r.config.schedule, T);
      rep.value = bcr_bound_finite(T, p.shape.domain_size, rep.noise_variance, rep.gamma);
      out.push_back(finish_bound_report(rep));
      if (c.greedy_gain && !p.candidates.empty()) {
        BoundReport g = rep;
        g.name = r.label + ":bcr_finite_greedy_gamma";
        g.gamma = greedy_information_gain(r.config.kernel, p.candidates,
                                          static_cast<std::size_t>(T), rep.noise_variance);
        g.value = bcr_bound_finite(T, p.shape.domain_size, g.noise_variance, g.gamma);
        out.push_back(finish_bound_report(g));
      }
    } else if (const auto* sc = std::get_if<schedule::ShiftedExpContinuous>(&v)) {
      rep.name = r.label + ":bcr_continuous";
      rep.s_T = schedule_shift(r.config.schedule, T);
      rep.value = bcr_bound_continuous(T, sc->a, sc->b, sc->r, sc->d, rep.noise_variance, rep.gamma);
      out.push_back(finish_bound_report(rep));
    } else if (const auto* hp = std::get_if<schedule::ShiftedExpHighProb>(&v)) {
      // Coverage: fraction of runs whose regret exceeds their own bound,
      // compared with delta under the binomial standard error.
      std::size_t exceed = 0;
      for (const auto& tr : r.traces) {
        const double bound = high_prob_bound(T, hp->delta, hp->domain_size, rep.noise_variance,
                                             prefix_gain(tr, T));
        if (prefix_regret(tr, T) > bound) ++exceed;
      }
      const double n = static_cast<double>(r.traces.size());
      rep.name = r.label + ":high_prob_exceedance";
      rep.delta = hp->delta;
      rep.s_T = shift_high_prob(hp->domain_size, T, hp->delta);
      rep.value = hp->delta;
      rep.target = static_cast<double>(exceed) / n;
      rep.target_stderr = std::sqrt(hp->delta * (1.0 - hp->delta) / n);
      out.push_back(finish_bound_report(rep));
    }
  }
  return out;
}

class OutputDir {
 public:
  OutputDir(fs::path dir, bool overwrite) : dir_(std::move(dir)) {
    if (dir_.empty()) throw ConfigError("no output directory given");
    if (fs::exists(dir_)) {
      if (!fs::is_directory(dir_)) {
        throw ConfigError("output path '" + dir_.string() + "' exists and is not a directory");
      }
      if (!fs::is_empty(dir_) && !overwrite) {
        throw ConfigError("output directory '" + dir_.string() +
                          "' already exists; pass --overwrite to replace its files");
      }
    }
  }

  void write(const std::string& name, const std::string& content) {
    pending_.emplace_back(name, content);
  }

  // All files land together after every computation has finished.
  std::vector<fs::path> flush() {
    fs::create_directories(dir_);
    std::vector<fs::path> out;
    for (const auto& [name, content] : pending_) {
      const auto path = dir_ / name;
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f) throw Error("cannot write '" + path.string() + "'");
      f << content;
      out.push_back(path);
    }
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& p : pending_) n.push_back(p.first);
    std::sort(n.begin(), n.end());
    return n;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> pending_;
};

json failures_json(const std::vector<AlgorithmResult>& results) {
  json f = json::array();
  for (const auto& r : results) {
    for (const auto& [rep, err] : r.failures) {
      f.push_back({{"algorithm", r.label}, {"replication", rep}, {"error", err}});
    }
  }
  return f;
}

void write_manifest(OutputDir& out, const ExperimentConfig& c, json extra) {
  json m;
  m["software"] = "irgp";
  m["version"] = std::string(software_version());
  m["kind"] = std::string(kind_name(c.kind));
  m["seed"] = c.seed;
  m["reps"] = c.reps;
  m["isa"] = std::string(simd::active().name);
  m["config"] = serialize_config(c);
  auto files = out.names();
  files.push_back("manifest.json");
  std::sort(files.begin(), files.end());
  m["files"] = files;
  for (auto& [k, v] : extra.items()) m[k] = v;
  out.write("manifest.json", m.dump(2) + "\n");
}

std::string to_text(const std::function<void(std::ostream&)>& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

bool run_bo_kind(const ExperimentConfig& c, const Problem& p, OutputDir& out,
                 std::ostream* log) {
  auto results = run_roster(c, p, log);
  bool ok = true;

  std::ostringstream summary;
  write_summary_header(summary);
  json reports = json::array();
  json slopes = json::array();
  const auto horizons = c.report_horizons();

  for (const auto& r : results) {
    out.write("traces_" + r.label + ".csv", to_text([&](std::ostream& s) {
      write_traces_csv(r.traces, s);
    }));
    if (r.traces.empty()) {
      ok = false;
      continue;
    }
    const auto s = summarize(r.traces);
    write_summary_rows(r.label, s, summary);
    for (long long T : horizons) {
      const auto at = summarize(r.traces, T);
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-22s T=%-6lld mean R_T = %.6g (se %.3g)  simple = %.6g",
                    r.label.c_str(), T, at.mean_cumulative, at.stderr_cumulative, at.mean_simple);
      say(log, buf);
    }
    for (const auto& b : run_bounds(r, c, p)) {
      reports.push_back(report_json(b));
      if (!b.satisfied) ok = false;
    }
    if (c.kind == ExperimentKind::kCounterexample && horizons.size() >= 2) {
      const auto s1 = summarize(r.traces, horizons.front());
      const auto s2 = summarize(r.traces, horizons.back());
      const auto test = regret_slope_test(s1, s2);
      slopes.push_back({{"algorithm", r.label},
                        {"t1", horizons.front()},
                        {"t2", horizons.back()},
                        {"bcr_t1", s1.mean_cumulative},
                        {"bcr_t2", s2.mean_cumulative},
                        {"ratio", std::isfinite(test.ratio) ? json(test.ratio) : json(nullptr)},
                        {"verdict", std::string(verdict_name(test.verdict))}});
      say(log, "  " + r.label + ": slope ratio " + label_number(test.ratio) + " -> " +
                   std::string(verdict_name(test.verdict)));
    }
  }
  out.write("summary.csv", summary.str());
  json bounds{{"bound_reports", reports}};
  if (c.kind == ExperimentKind::kCounterexample) bounds["slope_tests"] = slopes;
  out.write("bounds.json", bounds.dump(2) + "\n");
  write_manifest(out, c, {{"failures", failures_json(results)}});
  return ok;
}

bool run_conditional_kind(const ExperimentConfig& c, const Problem& p, OutputDir& out,
                          std::ostream* log) {
  const long long T = c.report_horizons().back();
  std::ostringstream summary;
  write_summary_header(summary);
  std::ostringstream table;
  table << "algorithm,sequence,T,mean_RT,stderr_RT,s_T,gamma,bound_u,satisfied\n";
  json reports = json::array();
  std::vector<AlgorithmResult> all;
  bool ok = true;

  for (const auto& run : resolve_with(c, p.shape, base_bo_config(c, p))) {
    if (run.config.acquisition != AcquisitionKind::kUcb) {
      say(log, "skipping " + run.label + ": conditional regret needs a confidence schedule");
      continue;
    }
    const bool continuous =
        std::holds_alternative<schedule::ShiftedExpContinuous>(run.config.schedule.variant());
    for (std::size_t k = 0; k < c.zeta_sequences; ++k) {
      const std::uint64_t zseed = hash_key({c.seed, key_of(Stream::kZetaSequence), k});
      BoConfig cfg = run.config;
      cfg.zeta_sequence = draw_zeta_sequence(run.config.schedule, T, zseed);
      const std::string label = run.label + "-seq" + std::to_string(k);
      say(log, "running " + label);
      const auto reps = run_replications(p.sampler, cfg, c.reps, c.seed, c.threads);
      AlgorithmResult r{label, cfg, successful_traces(reps), {}};
      for (const auto& rep : reps) {
        if (!rep.trace) r.failures.emplace_back(rep.replication, rep.error);
      }
      out.write("traces_" + label + ".csv", to_text([&](std::ostream& s) {
        write_traces_csv(r.traces, s);
      }));
      if (r.traces.empty()) {
        ok = false;
        all.push_back(std::move(r));
        continue;
      }
      const auto s = summarize(r.traces);
      write_summary_rows(label, s, summary);

      BoundReport b;
      b.name = label + ":conditional_u";
      b.T = T;
      b.domain_size = p.shape.domain_size;
      b.noise_variance = cfg.noise_variance;
      b.delta = c.delta;
      b.s_T = schedule_shift(run.config.schedule, T);
      b.gamma = s.mean_information_gain;
      b.value = conditional_bound_u(T, c.delta, b.s_T, b.noise_variance, b.gamma, continuous);
      b.target = s.mean_cumulative;
      b.target_stderr = s.stderr_cumulative;
      b = finish_bound_report(b);
      if (!b.satisfied) ok = false;
      reports.push_back(report_json(b));
      table << run.label << ',' << k << ',' << T << ',' << format_number(s.mean_cumulative) << ','
            << format_number(s.stderr_cumulative) << ',' << format_number(b.s_T) << ','
            << format_number(b.gamma) << ',' << format_number(b.value) << ','
            << (b.satisfied ? "true" : "false") << '\n';
      all.push_back(std::move(r));
    }
  }
  out.write("summary.csv", summary.str());
  out.write("conditional.csv", table.str());
  out.write("bounds.json", json{{"bound_reports", reports}}.dump(2) + "\n");
  write_manifest(out, c, {{"failures", failures_json(all)}});
  return ok;
}

bool run_lemma_kind(const ExperimentConfig& c, OutputDir& out, std::ostream* log) {
  const auto cases =
      lemma_sweep(c.lemma_configs, c.lemma_max_grid, c.lemma_max_data, c.noise_variance, c.seed);
  say(log, "checking " + std::to_string(cases.size()) + " configurations at n_mc = " +
               std::to_string(c.lemma_samples));
  const auto rows = run_lemma_sweep(cases, c.noise_variance, c.lemma_samples, c.seed, c.threads);
  bool ok = true;
  for (const auto& r : rows) ok = ok && r.check.holds;
  out.write("lemma.csv", to_text([&](std::ostream& s) { write_lemma_csv(rows, s); }));
  write_manifest(out, c, {{"all_hold", ok}});
  say(log, ok ? "every configuration satisfied the inequality"
              : "at least one configuration violated the inequality");
  return ok;
}

bool run_sweep_kind(const ExperimentConfig& c, const Problem& p, OutputDir& out,
                    std::ostream* log) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = p.shape.domain_size;
  json reports = json::array();
  std::ostringstream csv;
  csv << "name,T,domain_size,gamma,value\n";
  for (long long T : c.report_horizons()) {
    const double gamma = greedy_information_gain(p.kernel, p.candidates,
                                                 static_cast<std::size_t>(T), c.noise_variance);
    std::vector<BoundReport> reps;
    BoundReport b;
    b.T = T;
    b.domain_size = n;
    b.noise_variance = c.noise_variance;
    b.gamma = gamma;
    b.delta = nan;
    b.s_T = nan;
    b.target = nan;
    b.target_stderr = nan;
    b.slack = nan;
    if (n >= 2) {
      b.name = "bcr_finite";
      b.value = bcr_bound_finite(T, n, c.noise_variance, gamma);
      reps.push_back(b);
      b.name = "conditional_u";
      b.delta = c.delta;
      b.s_T = shift_finite(n);
      b.value = conditional_bound_u(T, c.delta, b.s_T, c.noise_variance, gamma, false);
      reps.push_back(b);
    }
    b.name = "high_prob";
    b.delta = c.delta;
    b.s_T = shift_high_prob(n, T, c.delta);
    b.value = high_prob_bound(T, c.delta, n, c.noise_variance, gamma);
    reps.push_back(b);
    if (c.a && c.b && c.r) {
      b.name = "bcr_continuous";
      b.delta = nan;
      b.s_T = shift_continuous(*c.a, *c.b, *c.r, static_cast<int>(p.shape.dim), T);
      b.value = bcr_bound_continuous(T, *c.a, *c.b, *c.r, static_cast<int>(p.shape.dim),
                                     c.noise_variance, gamma);
      reps.push_back(b);
    }
    for (const auto& r : reps) {
      reports.push_back(report_json(r));
      csv << r.name << ',' << r.T << ',' << r.domain_size << ',' << format_number(r.gamma) << ','
          << format_number(r.value) << '\n';
    }
    say(log, "T = " + std::to_string(T) + ": greedy gamma = " + format_number(gamma));
  }
  out.write("bounds.csv", csv.str());
  out.write("bounds.json", json{{"bound_reports", reports}}.dump(2) + "\n");
  write_manifest(out, c, json::object());
  return true;
}

}  // namespace

std::string_view software_version() noexcept { return IRGP_VERSION; }

std::vector<AlgorithmRun> resolve_algorithms(const ExperimentConfig& config,
                                             const ProblemShape& shape) {
  Problem p;
  p.shape = shape;
  p.model_noise = config.kind == ExperimentKind::kCounterexample ? 1.0 : config.noise_variance;
  p.kernel = config.kind == ExperimentKind::kCounterexample
                 ? KernelSpec::isotropic(KernelFamily::kSquaredExponential, 1.0, 1)
                 : config.kernel(shape.dim);
  return resolve_with(config, shape, base_bo_config(config, p));
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
  OutputDir out(options.out_dir, options.overwrite);
  ExperimentOutcome outcome;
  std::ostream* log = options.log;
  say(log, "experiment " + std::string(kind_name(config.kind)) + ", seed " +
               std::to_string(config.seed) + ", output " + options.out_dir.string());
  switch (config.kind) {
    case ExperimentKind::kLemmaCheck:
      outcome.checks_passed = run_lemma_kind(config, out, log);
      break;
    case ExperimentKind::kConditionalRegret:
      outcome.checks_passed = run_conditional_kind(config, build_problem(config), out, log);
      break;
    case ExperimentKind::kBoundSweep:
      outcome.checks_passed = run_sweep_kind(config, build_problem(config), out, log);
      break;
    default:
      outcome.checks_passed = run_bo_kind(config, build_problem(config), out, log);
      break;
  }
  outcome.files = out.flush();
  return outcome;
}

fs::path default_output_dir(const ExperimentConfig& config, const fs::path& config_path) {
  if (!config.output_dir.empty()) return config.output_dir;
  const char* root = std::getenv("IRGP_OUTPUT_ROOT");
  const fs::path base = (root && *root) ? fs::path(root) : fs::path("irgp-runs");
  const auto stem = config_path.stem();
  return base / (stem.empty() ? fs::path("run") : stem);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_traces_csv(const std::vector<BoTrace>& traces, std::ostream& out) {
  std::size_t dim = 0;
  for (const auto& tr : traces) {
    if (!tr.records.empty()) {
      dim = tr.records.front().x.size();
      break;
    }
  }
  out << "rep,t,selected_index";
  for (std::size_t k = 0; k < dim; ++k) out << ",x" << k;
  out << ",zeta,y,mu,sigma,r_t,R_t\n";
  for (const auto& tr : traces) {
    for (const auto& r : tr.records) {
      out << tr.replication << ',' << r.t << ',' << r.index;
      for (double x : r.x) out << ',' << format_number(x);
      out << ',' << format_number(r.zeta) << ',' << format_number(r.y) << ','
          << format_number(r.mu) << ',' << format_number(r.sigma) << ','
          << format_number(r.regret) << ',' << format_number(r.cumulative) << '\n';
    }
  }
}

void write_summary_header(std::ostream& out) {
  out << "algorithm,t,mean_Rt,stderr_Rt,mean_simple,stderr_simple\n";
}

void write_summary_rows(std::string_view algorithm, const RegretSummary& s, std::ostream& out) {
  for (std::size_t i = 0; i < s.mean_curve.size(); ++i) {
    out << algorithm << ',' << (i + 1) << ',' << format_number(s.mean_curve[i]) << ','
        << format_number(s.stderr_curve[i]) << ',' << format_number(s.mean_simple_curve[i]) << ','
        << format_number(s.stderr_simple_curve[i]) << '\n';
  }
}

std::vector<NamedSchedule> profile_schedules(const ExperimentConfig& config) {
  const std::size_t n = config.profile_domain_size;
  return {
      {"gp-ucb", ConfidenceSchedule(schedule::DeterministicUcb{n, config.delta})},
      {"rgp-ucb", ConfidenceSchedule(schedule::GammaRandomized{n, config.theta})},
      {"irgp-ucb", ConfidenceSchedule(schedule::ShiftedExpFinite{n})},
  };
}

void emit_confidence_profile(std::span<const NamedSchedule> schedules, long long T,
                             std::ostream& out) {
  if (T < 1) throw ConfigError("confidence profile needs T >= 1");
  out << "schedule,t,mean,q025,q975\n";
  for (const auto& s : schedules) {
    for (long long t = 1; t <= T; ++t) {
      out << s.name << ',' << t << ',' << format_number(confidence_mean(s.schedule, t)) << ','
          << format_number(confidence_quantile(s.schedule, t, 0.025)) << ','
          << format_number(confidence_quantile(s.schedule, t, 0.975)) << '\n';
    }
  }
}

std::vector<LemmaCase> lemma_sweep(std::size_t n_configs, std::size_t max_grid,
                                   std::size_t max_data, double noise_variance,
                                   std::uint64_t seed) {
  if (max_grid < 2) throw ConfigError("lemma sweep: max_grid must be >= 2");
  constexpr KernelFamily kFamilies[] = {KernelFamily::kSquaredExponential, KernelFamily::kMatern52,
                                        KernelFamily::kMatern32};
  std::vector<LemmaCase> out;
  out.reserve(n_configs);
  for (std::size_t i = 0; i < n_configs; ++i) {
    Rng rng = Rng::keyed({seed, key_of(Stream::kInstance), i});
    LemmaCase lc;
    lc.id = i;
    const std::size_t dim = 1 + static_cast<std::size_t>(rng() % 3);
    const std::size_t m = 2 + static_cast<std::size_t>(rng() % (max_grid - 1));
    const std::size_t n_data = static_cast<std::size_t>(rng() % (max_data + 1));
    const double ell = 0.1 + 0.5 * rng.uniform();
    lc.kernel = KernelSpec::isotropic(kFamilies[i % 3], ell, dim);
    lc.candidates = PointSet(dim);
    std::vector<double> x(dim);
    for (std::size_t j = 0; j < m; ++j) {
      for (auto& v : x) v = rng.uniform();
      lc.candidates.push_back(x);
    }
    const Eigen::VectorXd f = sample_prior(lc.kernel, lc.candidates, rng());
    lc.data_inputs = PointSet(dim);
    const double sd = std::sqrt(noise_variance);
    for (std::size_t k = 0; k < n_data; ++k) {
      const std::size_t j = static_cast<std::size_t>(rng() % m);
      lc.data_inputs.push_back(lc.candidates.point(j));
      lc.data_outputs.push_back(f[static_cast<Eigen::Index>(j)] + sd * rng.normal());
    }
    out.push_back(std::move(lc));
  }
  return out;
}

std::vector<LemmaRow> run_lemma_sweep(const std::vector<LemmaCase>& cases, double noise_variance,
                                      std::size_t n_mc, std::uint64_t seed, unsigned threads) {
  std::vector<LemmaRow> rows(cases.size());
  parallel_for(cases.size(), threads, [&](std::size_t i) {
    rows[i].setup = cases[i];
    rows[i].check = validate_lemma_4_2(cases[i].kernel, cases[i].candidates,
                                       cases[i].data_inputs, cases[i].data_outputs,
                                       noise_variance, n_mc, hash_key({seed, i}));
  });
  return rows;
}

void write_lemma_csv(const std::vector<LemmaRow>& rows, std::ostream& out) {
  out << "config,family,dim,grid_size,data_size,lengthscale,lhs,lhs_stderr,rhs,rhs_stderr,"
         "combined_stderr,holds\n";
  for (const auto& r : rows) {
    const auto& s = r.setup;
    out << s.id << ',' << family_name(s.kernel.family) << ',' << s.kernel.dim() << ','
        << s.candidates.size() << ',' << s.data_outputs.size() << ','
        << format_number(s.kernel.lengthscales.front()) << ','
        << format_number(r.check.lhs.mean) << ',' << format_number(r.check.lhs.std_error) << ','
        << format_number(r.check.rhs.mean) << ',' << format_number(r.check.rhs.std_error) << ','
        << format_number(std::hypot(r.check.lhs.std_error, r.check.rhs.std_error)) << ','
        << (r.check.holds ? "true" : "false") << '\n';
  }
}

namespace {

bool check_lemma(bool quick, std::ostream& log) {
  const std::size_t configs = quick ? 10 : 50;
  const std::size_t n_mc = quick ? 10000 : 100000;
  const double noise = 1e-4;
  const auto rows = run_lemma_sweep(lemma_sweep(configs, 50, 20, noise, 42), noise, n_mc, 42);
  bool ok = true;
  log << "config family dim |X| |D| lhs rhs combined_se holds\n";
  for (const auto& r : rows) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%3zu %-12s %zu %3zu %3zu %10.6f %10.6f %.2e %s", r.setup.id,
                  std::string(family_name(r.setup.kernel.family)).c_str(), r.setup.kernel.dim(),
                  r.setup.candidates.size(), r.setup.data_outputs.size(), r.check.lhs.mean,
                  r.check.rhs.mean, std::hypot(r.check.lhs.std_error, r.check.rhs.std_error),
                  r.check.holds ? "yes" : "NO");
    log << buf << '\n';
    ok = ok && r.check.holds;
  }
  log << (ok ? "PASS" : "FAIL") << " lemma42\n";
  return ok;
}

bool check_counterexample(bool quick, std::ostream& log) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kCounterexample;
  c.algorithms = {"ucb-constant", "irgp-ucb"};
  c.constants = {0.25, 1.0, 4.0};  // multipliers 0.5, 1, 2 on sigma
  c.horizons = {250, 1000};
  c.horizon = 1000;
  c.reps = quick ? 100 : 500;
  c.seed = 7;
  const auto results = run_roster(c, build_problem(c), nullptr);
  bool ok = true;
  for (const auto& r : results) {
    if (r.traces.empty()) {
      log << r.label << ": every replication failed\n";
      ok = false;
      continue;
    }
    const auto s1 = summarize(r.traces, 250);
    const auto s2 = summarize(r.traces, 1000);
    const auto test = regret_slope_test(s1, s2);
    const bool constant = r.label.rfind("ucb-constant", 0) == 0;
    const double per_round = s2.mean_cumulative / 1000.0;
    const bool pass = constant ? (test.verdict == SlopeVerdict::kLinear && per_round >= 0.1)
                               : test.verdict == SlopeVerdict::kSublinear;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-18s BCR_250 = %9.4f  BCR_1000 = %9.4f  ratio = %.4f  %s  %s",
                  r.label.c_str(), s1.mean_cumulative, s2.mean_cumulative, test.ratio,
                  std::string(verdict_name(test.verdict)).c_str(), pass ? "ok" : "MISMATCH");
    log << buf << '\n';
    ok = ok && pass;
  }
  log << (ok ? "PASS" : "FAIL") << " counterexample\n";
  return ok;
}

bool check_bounds(bool quick, std::ostream& log) {
  const std::size_t n_mc = quick ? 10000 : 100000;
  bool ok = true;
  auto line = [&](bool pass, const std::string& what) {
    log << (pass ? "ok   " : "FAIL ") << what << '\n';
    ok = ok && pass;
  };

  const auto e1000 = noise_event_frequency(1000, n_mc, 11);
  line(e1000.mean >= 0.229, "noise event at T=1000: " + format_number(e1000.mean) + " >= 0.229");
  const auto e1 = noise_event_frequency(1, n_mc, 11);
  const double phi1 = 1.0 - gaussian_survival(1.0);
  line(std::abs(e1.mean - phi1) <= 3.0 * e1.std_error,
       "noise event at T=1: " + format_number(e1.mean) + " vs Phi(1) = " + format_number(phi1));

  for (long long D : {1LL, 10LL, 100LL}) {
    for (double delta : {0.01, 0.05, 0.2}) {
      const auto ex = chi_square_exceedance(D, delta, n_mc, 13);
      line(ex.mean <= delta, "chi-square D=" + std::to_string(D) + " delta=" +
                                 label_number(delta) + ": exceedance " + format_number(ex.mean));
    }
  }

  bool tail = true;
  for (int i = 1; i <= 50; ++i) {
    const double c = 0.1 * i;
    tail = tail && gaussian_tail_bound(c) - gaussian_survival(c) >= 0.0;
  }
  line(tail, "0.5 exp(-c^2/2) >= 1 - Phi(c) on c = 0.1..5.0");
  log << (ok ? "PASS" : "FAIL") << " bounds\n";
  return ok;
}

}  // namespace

bool run_check(std::string_view name, bool quick, std::ostream& log) {
  if (name == "lemma42") return check_lemma(quick, log);
  if (name == "counterexample") return check_counterexample(quick, log);
  if (name == "bounds") return check_bounds(quick, log);
  throw ConfigError("unknown check '" + std::string(name) +
                    "' (expected lemma42, counterexample or bounds)");
}

}  // namespace irgp
