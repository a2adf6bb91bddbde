#include "irgp/bench.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "irgp/errors.hpp"
#include "irgp/rng.hpp"

namespace irgp {

namespace {

constexpr BenchmarkInfo kHolderTable{"holder_table", 2, -10.0, 10.0, 19.20850256788675};
constexpr BenchmarkInfo kCrossInTray{"cross_in_tray", 2, -10.0, 10.0, 2.0626118708227392};
constexpr BenchmarkInfo kAckley{"ackley", 0, -32.768, 32.768, 0.0};

ProblemInstance instance_from_values(PointSet points, std::vector<double> values,
                                     double noise_stddev) {
  ProblemInstance inst;
  inst.candidates.points = std::move(points);
  inst.true_values = std::move(values);
  inst.noise_stddev = noise_stddev;
  set_optimum_from_values(inst);
  return inst;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null" ||
         cell == "NULL";
}

bool parse_number(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

GridSpec GridSpec::uniform(double low, double high, std::size_t count, std::size_t dim) {
  if (count == 0 || dim == 0) throw ConfigError("grid needs count >= 1 and dim >= 1");
  if (!(high >= low)) throw ConfigError("grid high must be >= low");
  std::vector<double> axis(count);
  for (std::size_t i = 0; i < count; ++i) {
    axis[i] = count == 1 ? low
                         : low + (high - low) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return GridSpec{std::vector<std::vector<double>>(dim, axis)};
}

std::size_t GridSpec::size() const noexcept {
  if (coords.empty()) return 0;
  std::size_t n = 1;
  for (const auto& c : coords) n *= c.size();
  return n;
}

void GridSpec::validate() const {
  if (coords.empty()) throw ConfigError("grid has no dimensions");
  for (const auto& c : coords) {
    if (c.empty()) throw ConfigError("grid axis has no coordinates");
  }
}

PointSet make_grid(const GridSpec& grid) {
  grid.validate();
  const std::size_t d = grid.dim();
  const std::size_t n = grid.size();
  PointSet pts(d);
  pts.reserve(n);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t k = 0; k < d; ++k) x[k] = grid.coords[k][idx[k]];
    pts.push_back(x);
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < grid.coords[k].size()) break;
      idx[k] = 0;
    }
  }
  return pts;
}

ProblemInstance make_synthetic_instance(const KernelSpec& kernel, const GridSpec& grid,
                                        double noise_stddev, std::uint64_t seed) {
  PointSet pts = make_grid(grid);
  const Eigen::VectorXd f = sample_prior(kernel, pts, seed);
  return instance_from_values(std::move(pts), std::vector<double>(f.data(), f.data() + f.size()),
                              noise_stddev);
}

InstanceSampler synthetic_sampler(const KernelSpec& kernel, const PointSet& candidates,
                                  double noise_stddev) {
  kernel.validate();
  if (candidates.empty()) throw ConfigError("synthetic sampler needs candidates");
  auto points = std::make_shared<const PointSet>(candidates);
  auto sampler =
      std::make_shared<const PriorSampler>(gram_matrix(kernel, candidates), kernel.signal_variance);
  return [points, sampler, noise_stddev](std::uint64_t base_seed, std::size_t rep) {
    Rng rng(hash_key({base_seed, static_cast<std::uint64_t>(rep), key_of(Stream::kInstance)}));
    const Eigen::VectorXd f = sampler->draw(rng);
    return instance_from_values(*points, std::vector<double>(f.data(), f.data() + f.size()),
                                noise_stddev);
  };
}

InstanceSampler synthetic_sampler(const KernelSpec& kernel, const GridSpec& grid,
                                  double noise_stddev) {
  return synthetic_sampler(kernel, make_grid(grid), noise_stddev);
}

BenchmarkFunction parse_benchmark(std::string_view name) {
  if (name == "holder_table" || name == "holdertable") return BenchmarkFunction::kHolderTable;
  if (name == "cross_in_tray" || name == "crossintray") return BenchmarkFunction::kCrossInTray;
  if (name == "ackley") return BenchmarkFunction::kAckley;
  throw ConfigError("unknown benchmark function '" + std::string(name) +
                    "' (expected holder_table, cross_in_tray, ackley)");
}

const BenchmarkInfo& benchmark_info(BenchmarkFunction fn) noexcept {
  switch (fn) {
    case BenchmarkFunction::kHolderTable:
      return kHolderTable;
    case BenchmarkFunction::kCrossInTray:
      return kCrossInTray;
    case BenchmarkFunction::kAckley:
      return kAckley;
  }
  return kAckley;
}

double benchmark_function(BenchmarkFunction fn, std::span<const double> x) {
  const BenchmarkInfo& info = benchmark_info(fn);
  if (x.empty() || (info.dim != 0 && x.size() != info.dim)) {
    throw ConfigError(std::string(info.name) + " expects dimension " +
                      (info.dim ? std::to_string(info.dim) : std::string(">= 1")) + ", got " +
                      std::to_string(x.size()));
  }
  for (double v : x) {
    if (!(v >= info.lower && v <= info.upper)) {
      throw DomainError(std::string(info.name) + ": point outside [" + std::to_string(info.lower) +
                        ", " + std::to_string(info.upper) + "]");
    }
  }
  using std::numbers::pi;
  switch (fn) {
    case BenchmarkFunction::kHolderTable: {
      const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
      return std::abs(std::sin(x[0]) * std::cos(x[1]) * std::exp(std::abs(1.0 - r / pi)));
    }
    case BenchmarkFunction::kCrossInTray: {
      const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
      const double inner = std::abs(std::sin(x[0]) * std::sin(x[1]) * std::exp(std::abs(100.0 - r / pi)));
      return 1e-4 * std::pow(inner + 1.0, 0.1);
    }
    case BenchmarkFunction::kAckley: {
      const double d = static_cast<double>(x.size());
      double sq = 0.0, cs = 0.0;
      for (double v : x) {
        sq += v * v;
        cs += std::cos(2.0 * pi * v);
      }
      const double value = -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 +
                           std::numbers::e;
      return -value;
    }
  }
  return 0.0;
}

ProblemInstance make_benchmark_instance(BenchmarkFunction fn, std::size_t dim,
                                        std::size_t candidates_per_iteration, double noise_stddev) {
  const BenchmarkInfo& info = benchmark_info(fn);
  if (info.dim != 0 && dim != info.dim) {
    throw ConfigError(std::string(info.name) + " is defined for d = " + std::to_string(info.dim));
  }
  if (dim == 0) throw ConfigError("benchmark dimension must be >= 1");
  if (candidates_per_iteration == 0) throw ConfigError("candidate count must be >= 1");
  ProblemInstance inst;
  inst.candidates.points = PointSet(dim);
  inst.candidates.provenance = CandidateProvenance::kPerIterationRandom;
  inst.candidates.random_count = candidates_per_iteration;
  inst.objective = [fn](std::span<const double> x) { return benchmark_function(fn, x); };
  inst.lower.assign(dim, info.lower);
  inst.upper.assign(dim, info.upper);
  inst.optimum_value = info.optimum_value;
  inst.noise_stddev = noise_stddev;
  inst.label = std::string(info.name);
  return inst;
}

TabularProblem parse_tabular(std::string_view text, std::string_view objective_column,
                             double noise_stddev) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos <= text.size();) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(pos, end - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw IngestionError("tabular file is empty");
  std::string_view header_line = lines.front();
  if (header_line.starts_with("\xEF\xBB\xBF")) header_line.remove_prefix(3);
  const std::vector<std::string> header = split_row(header_line);

  std::size_t objective = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == objective_column) objective = c;
  }
  if (objective == header.size()) {
    throw IngestionError("objective column '" + std::string(objective_column) +
                         "' not found in the header");
  }
  if (header.size() < 2) throw IngestionError("tabular file needs at least one feature column");

  const std::size_t cols = header.size();
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> missing_rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::size_t row_no = li + 1;  // 1-based line number in the file
    const std::vector<std::string> cells = split_row(lines[li]);
    if (cells.size() != cols) {
      throw ParseError("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(cols),
                       row_no, std::min(cells.size(), cols) + 1);
    }
    std::vector<double> values(cols);
    bool missing = false;
    for (std::size_t c = 0; c < cols; ++c) {
      if (is_missing(cells[c])) {
        missing = true;
        continue;
      }
      if (!parse_number(cells[c], values[c])) {
        throw ParseError("row " + std::to_string(row_no) + ", column " + std::to_string(c + 1) +
                             " ('" + header[c] + "'): '" + cells[c] + "' is not a number",
                         row_no, c + 1);
      }
    }
    if (missing) {
      missing_rows.push_back(row_no);
    } else {
      rows.push_back(std::move(values));
    }
  }
  if (!missing_rows.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing_rows.size(); ++i) {
      list += (i ? ", " : "") + std::to_string(missing_rows[i]);
    }
    throw IngestionError("missing values in rows " + list);
  }
  if (rows.size() < 2) throw IngestionError("tabular file needs at least 2 data rows");

  TabularDataset ds;
  ds.objective_name = header[objective];
  for (std::size_t c = 0; c < cols; ++c) {
    if (c != objective) ds.feature_names.push_back(header[c]);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(cols - 1);
  ds.raw_features.resize(n, d);
  ds.objective.resize(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index k = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (c == objective) {
        ds.objective[static_cast<std::size_t>(i)] = rows[static_cast<std::size_t>(i)][c];
      } else {
        ds.raw_features(i, k++) = rows[static_cast<std::size_t>(i)][c];
      }
    }
  }
  ds.features = ds.raw_features;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double mean = ds.raw_features.col(k).mean();
    const double var = (ds.raw_features.col(k).array() - mean).square().mean();
    const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
    ds.features.col(k) = (ds.raw_features.col(k).array() - mean) / scale;
    ds.feature_mean.push_back(mean);
    ds.feature_scale.push_back(scale);
  }

  TabularProblem out{std::move(ds), {}};
  out.instance = instance_from_values(PointSet(out.dataset.features), out.dataset.objective,
                                      noise_stddev);
  out.instance.label = "tabular:" + out.dataset.objective_name;
  return out;
}

TabularProblem ingest_tabular(const std::string& path, std::string_view objective_column,
                              double noise_stddev) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open tabular file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tabular(buf.str(), objective_column, noise_stddev);
}

void serialize_tabular(const TabularDataset& dataset, std::ostream& out) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto& name : dataset.feature_names) out << quote(name) << ',';
  out << quote(dataset.objective_name) << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < dataset.raw_features.rows(); ++i) {
    for (Eigen::Index k = 0; k < dataset.raw_features.cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", dataset.raw_features(i, k));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", dataset.objective[static_cast<std::size_t>(i)]);
    out << buf << '\n';
  }
}

}  // namespace irgp
