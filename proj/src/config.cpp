#include "irgp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "irgp/errors.hpp"

namespace irgp {

namespace {

struct KindEntry {
  ExperimentKind kind;
  std::string_view name;
};

constexpr KindEntry kKinds[] = {
    {ExperimentKind::kSyntheticBcr, "synthetic_bcr"},
    {ExperimentKind::kConditionalRegret, "conditional_regret"},
    {ExperimentKind::kBenchmark, "benchmark"},
    {ExperimentKind::kTabular, "tabular"},
    {ExperimentKind::kCounterexample, "counterexample"},
    {ExperimentKind::kLemmaCheck, "lemma_check"},
    {ExperimentKind::kBoundSweep, "bound_sweep"},
};

constexpr std::string_view kAlgorithms[] = {
    "gp-ucb", "rgp-ucb", "irgp-ucb", "irgp-ucb-hp", "irgp-ucb-continuous",
    "ucb-constant", "ei", "ts", "pims",
};

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    out.push_back(trim(std::string_view(value).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Parse helpers throw std::invalid_argument with a short reason; the caller
// attaches the key.
double to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  if (!std::isfinite(v)) throw std::invalid_argument("value must be finite");
  return v;
}

template <class Int>
Int to_integer(const std::string& s) {
  Int v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& s, F&& conv) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) out.push_back(conv(item));
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

std::string_view mode_name(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::kTheory: return "theory";
    case ScheduleMode::kHeuristic: return "heuristic";
    default: return "auto";
  }
}

struct KeyDef {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string uint_str(std::uint64_t v) { return std::to_string(v); }

const std::vector<KeyDef>& key_table() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<KeyDef> table = [] {
    std::vector<KeyDef> t;
    auto add = [&](std::string name, auto set, auto get) {
      t.push_back(KeyDef{std::move(name), set, get});
    };
    auto size_key = [&](std::string name, std::size_t C::*field) {
      add(name, [field](C& c, S v) { c.*field = to_integer<std::size_t>(v); },
          [field](const C& c) { return uint_str(c.*field); });
    };
    auto double_key = [&](std::string name, double C::*field) {
      add(name, [field](C& c, S v) { c.*field = to_double(v); },
          [field](const C& c) { return format_double(c.*field); });
    };
    auto opt_double_key = [&](std::string name, std::optional<double> C::*field) {
      add(name,
          [field](C& c, S v) {
            if (v.empty()) {
              (c.*field).reset();
            } else {
              c.*field = to_double(v);
            }
          },
          [field](const C& c) { return (c.*field) ? format_double(*(c.*field)) : std::string(); });
    };
    auto string_key = [&](std::string name, std::string C::*field) {
      add(name, [field](C& c, S v) { c.*field = v; }, [field](const C& c) { return c.*field; });
    };

    add("kind",
        [](C& c, S v) {
          for (const auto& k : kKinds) {
            if (k.name == v) {
              c.kind = k.kind;
              return;
            }
          }
          std::string names;
          for (const auto& k : kKinds) names += (names.empty() ? "" : ", ") + std::string(k.name);
          throw std::invalid_argument("unknown experiment kind '" + v + "' (expected one of " +
                                      names + ")");
        },
        [](const C& c) { return std::string(kind_name(c.kind)); });
    add("algorithms",
        [](C& c, S v) { c.algorithms = split_list(v); },
        [](const C& c) { return join(c.algorithms, [](const std::string& s) { return s; }); });
    add("horizon",
        [](C& c, S v) { c.horizon = to_integer<long long>(v); },
        [](const C& c) { return std::to_string(c.horizon); });
    add("horizons",
        [](C& c, S v) { c.horizons = to_list<long long>(v, to_integer<long long>); },
        [](const C& c) {
          return join(c.horizons, [](long long h) { return std::to_string(h); });
        });
    size_key("reps", &C::reps);
    add("seed",
        [](C& c, S v) { c.seed = to_integer<std::uint64_t>(v); },
        [](const C& c) { return uint_str(c.seed); });
    add("threads",
        [](C& c, S v) { c.threads = to_integer<unsigned>(v); },
        [](const C& c) { return std::to_string(c.threads); });
    string_key("output.dir", &C::output_dir);

    add("kernel.family",
        [](C& c, S v) {
          try {
            c.kernel_family = parse_family(v);
          } catch (const ConfigError& e) {
            throw std::invalid_argument(e.what());
          }
        },
        [](const C& c) { return std::string(family_name(c.kernel_family)); });
    add("kernel.lengthscale",
        [](C& c, S v) { c.lengthscales = to_list<double>(v, to_double); },
        [](const C& c) { return join(c.lengthscales, format_double); });
    double_key("kernel.signal_variance", &C::signal_variance);
    double_key("noise.variance", &C::noise_variance);

    double_key("grid.low", &C::grid_low);
    double_key("grid.high", &C::grid_high);
    size_key("grid.count", &C::grid_count);
    size_key("grid.dim", &C::grid_dim);

    add("init.size",
        [](C& c, S v) {
          if (v.empty()) {
            c.init_size.reset();
          } else {
            c.init_size = to_integer<std::size_t>(v);
          }
        },
        [](const C& c) { return c.init_size ? uint_str(*c.init_size) : std::string(); });
    add("init.indices",
        [](C& c, S v) { c.init_indices = to_list<std::size_t>(v, to_integer<std::size_t>); },
        [](const C& c) { return join(c.init_indices, uint_str); });

    add("schedule.mode",
        [](C& c, S v) {
          if (v == "auto") {
            c.schedule_mode = ScheduleMode::kAuto;
          } else if (v == "theory") {
            c.schedule_mode = ScheduleMode::kTheory;
          } else if (v == "heuristic") {
            c.schedule_mode = ScheduleMode::kHeuristic;
          } else {
            throw std::invalid_argument("expected auto, theory or heuristic, got '" + v + "'");
          }
        },
        [](const C& c) { return std::string(mode_name(c.schedule_mode)); });
    double_key("schedule.delta", &C::delta);
    double_key("schedule.theta", &C::theta);
    add("schedule.constant",
        [](C& c, S v) { c.constants = to_list<double>(v, to_double); },
        [](const C& c) { return join(c.constants, format_double); });
    opt_double_key("schedule.a", &C::a);
    opt_double_key("schedule.b", &C::b);
    opt_double_key("schedule.r", &C::r);

    size_key("acq.rff_features", &C::rff_features);
    size_key("acq.candidates", &C::candidates);

    size_key("refit.period", &C::refit_period);
    add("refit.lengthscales",
        [](C& c, S v) { c.refit_lengthscales = to_list<double>(v, to_double); },
        [](const C& c) { return join(c.refit_lengthscales, format_double); });
    add("refit.signal_variances",
        [](C& c, S v) { c.refit_signal_variances = to_list<double>(v, to_double); },
        [](const C& c) { return join(c.refit_signal_variances, format_double); });

    string_key("benchmark.function", &C::benchmark_function);
    size_key("benchmark.dim", &C::benchmark_dim);

    string_key("tabular.path", &C::tabular_path);
    string_key("tabular.objective", &C::tabular_objective);

    double_key("counterexample.rho", &C::rho);
    size_key("conditional.sequences", &C::zeta_sequences);

    size_key("lemma.configs", &C::lemma_configs);
    size_key("lemma.samples", &C::lemma_samples);
    size_key("lemma.max_grid", &C::lemma_max_grid);
    size_key("lemma.max_data", &C::lemma_max_data);

    add("bounds.greedy_gain",
        [](C& c, S v) { c.greedy_gain = to_bool(v); },
        [](const C& c) { return std::string(c.greedy_gain ? "true" : "false"); });
    size_key("profile.domain_size", &C::profile_domain_size);
    return t;
  }();
  return table;
}

const KeyDef* find_key(std::string_view name) {
  for (const auto& k : key_table()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::string suggest(std::string_view key) {
  // Compare against full keys and their last segment, so both
  // "kernel.lenghtscale" and "lenghtscale" find "kernel.lengthscale".
  const auto dot = key.rfind('.');
  const auto leaf = dot == std::string_view::npos ? key : key.substr(dot + 1);
  std::size_t best = std::string::npos;
  std::string best_name;
  for (const auto& k : key_table()) {
    std::string_view full = k.name;
    const auto kd = full.rfind('.');
    const auto kleaf = kd == std::string_view::npos ? full : full.substr(kd + 1);
    const auto d = std::min(edit_distance(key, full), edit_distance(leaf, kleaf));
    if (d < best) {
      best = d;
      best_name = k.name;
    }
  }
  if (best > std::max<std::size_t>(2, key.size() / 3)) return {};
  return best_name;
}

void validate(const ExperimentConfig& c, std::vector<ConfigIssue>& issues) {
  auto fail = [&](std::string key, std::string msg) {
    issues.push_back({std::move(key), std::move(msg)});
  };
  if (c.horizon < 1) fail("horizon", "must be >= 1");
  for (auto h : c.horizons) {
    if (h < 1) fail("horizons", "every horizon must be >= 1");
  }
  if (c.reps < 1) fail("reps", "must be >= 1");

  const bool runs_bo = c.kind != ExperimentKind::kLemmaCheck &&
                       c.kind != ExperimentKind::kBoundSweep;
  if (runs_bo) {
    if (c.algorithms.empty()) fail("algorithms", "at least one algorithm is required");
    for (const auto& a : c.algorithms) {
      if (std::find(std::begin(kAlgorithms), std::end(kAlgorithms), a) == std::end(kAlgorithms)) {
        fail("algorithms", "unknown algorithm '" + a + "'");
      }
      if (a == "irgp-ucb-continuous" && !(c.a && c.b && c.r)) {
        fail("schedule.a", "irgp-ucb-continuous needs schedule.a, schedule.b and schedule.r");
      }
    }
  }
  if (c.lengthscales.empty()) fail("kernel.lengthscale", "at least one value is required");
  for (double l : c.lengthscales) {
    if (!(l > 0.0)) fail("kernel.lengthscale", "must be > 0");
  }
  if (!(c.signal_variance > 0.0)) fail("kernel.signal_variance", "must be > 0");
  if (!(c.noise_variance > 0.0)) fail("noise.variance", "must be > 0");
  if (!(c.delta > 0.0 && c.delta < 1.0)) fail("schedule.delta", "must lie in (0, 1)");
  if (!(c.theta > 0.0)) fail("schedule.theta", "must be > 0");
  for (double v : c.constants) {
    if (v < 0.0) fail("schedule.constant", "must be >= 0");
  }
  if (c.rff_features < 1) fail("acq.rff_features", "must be >= 1");
  if (c.candidates < 1) fail("acq.candidates", "must be >= 1");
  for (double l : c.refit_lengthscales) {
    if (!(l > 0.0)) fail("refit.lengthscales", "must be > 0");
  }
  for (double v : c.refit_signal_variances) {
    if (!(v > 0.0)) fail("refit.signal_variances", "must be > 0");
  }
  if (c.refit_period > 0 && c.refit_lengthscales.empty()) {
    fail("refit.lengthscales", "required when refit.period > 0");
  }

  switch (c.kind) {
    case ExperimentKind::kSyntheticBcr:
    case ExperimentKind::kConditionalRegret:
      if (c.grid_count < 1) fail("grid.count", "must be >= 1");
      if (c.grid_dim < 1) fail("grid.dim", "must be >= 1");
      if (!(c.grid_high >= c.grid_low)) fail("grid.high", "must be >= grid.low");
      if (c.lengthscales.size() != 1 && c.lengthscales.size() != c.grid_dim) {
        fail("kernel.lengthscale", "give one value or grid.dim values");
      }
      if (c.kind == ExperimentKind::kConditionalRegret && c.zeta_sequences < 1) {
        fail("conditional.sequences", "must be >= 1");
      }
      break;
    case ExperimentKind::kBenchmark:
      if (c.benchmark_function.empty()) {
        fail("benchmark.function", "required for benchmark experiments");
      } else {
        const auto& n = c.benchmark_function;
        if (n != "holder_table" && n != "holdertable" && n != "cross_in_tray" &&
            n != "crossintray" && n != "ackley") {
          fail("benchmark.function", "unknown benchmark '" + n + "'");
        }
      }
      break;
    case ExperimentKind::kTabular:
      if (c.tabular_path.empty()) fail("tabular.path", "required for tabular experiments");
      if (c.tabular_objective.empty()) {
        fail("tabular.objective", "required for tabular experiments");
      }
      break;
    case ExperimentKind::kCounterexample:
      if (!(std::abs(c.rho) < std::sqrt(0.99))) {
        fail("counterexample.rho", "must satisfy |rho| < sqrt(0.99)");
      }
      break;
    case ExperimentKind::kLemmaCheck:
      if (c.lemma_configs < 1) fail("lemma.configs", "must be >= 1");
      if (c.lemma_samples < 2) fail("lemma.samples", "must be >= 2");
      if (c.lemma_max_grid < 2) fail("lemma.max_grid", "must be >= 2");
      break;
    case ExperimentKind::kBoundSweep:
      if (c.grid_count < 1) fail("grid.count", "must be >= 1");
      if (c.grid_dim < 1) fail("grid.dim", "must be >= 1");
      break;
  }
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) noexcept {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

KernelSpec ExperimentConfig::kernel(std::size_t dim) const {
  KernelSpec k;
  k.family = kernel_family;
  k.signal_variance = signal_variance;
  if (lengthscales.size() == 1) {
    k.lengthscales.assign(dim, lengthscales.front());
  } else if (lengthscales.size() == dim) {
    k.lengthscales = lengthscales;
  } else {
    throw ConfigError("kernel.lengthscale: expected 1 or " + std::to_string(dim) + " values, got " +
                      std::to_string(lengthscales.size()));
  }
  return k;
}

std::vector<long long> ExperimentConfig::report_horizons() const {
  std::vector<long long> h = horizons.empty() ? std::vector<long long>{horizon} : horizons;
  std::sort(h.begin(), h.end());
  h.erase(std::unique(h.begin(), h.end()), h.end());
  return h;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
  }();
  return keys;
}

std::vector<ConfigIssue> check_config(std::string_view text, ExperimentConfig* out) {
  ExperimentConfig config;
  std::vector<ConfigIssue> issues;
  std::map<std::string, std::size_t> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);

    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;

    const std::string where = "line " + std::to_string(line_no);
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      issues.push_back({where, "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) {
      issues.push_back({where, "missing key before '='"});
      continue;
    }
    const KeyDef* def = find_key(key);
    if (!def) {
      std::string msg = "unknown key '" + key + "' (" + where + ")";
      const auto hint = suggest(key);
      if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
      issues.push_back({key, msg});
      continue;
    }
    if (auto it = seen.find(key); it != seen.end()) {
      issues.push_back({key, "duplicate key (" + where + ", first set on line " +
                                 std::to_string(it->second) + ")"});
      continue;
    }
    seen.emplace(key, line_no);
    try {
      def->set(config, value);
    } catch (const std::invalid_argument& e) {
      issues.push_back({key, e.what()});
    }
  }

  validate(config, issues);
  if (out && issues.empty()) *out = std::move(config);
  return issues;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  const auto issues = check_config(text, &config);
  if (!issues.empty()) {
    std::string msg = std::to_string(issues.size()) + " configuration error(s):";
    for (const auto& i : issues) msg += "\n  " + i.key + ": " + i.message;
    throw ConfigError(msg);
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& k : key_table()) {
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += '\n';
  }
  return out;
}

}  // namespace irgp
