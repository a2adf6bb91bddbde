#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "irgp/engine.hpp"
#include "irgp/gp.hpp"
#include "irgp/kernel.hpp"
#include "irgp/points.hpp"

namespace irgp {

// Tensor grid given by one coordinate list per dimension.
struct GridSpec {
  std::vector<std::vector<double>> coords;

  // count equally spaced values from low to high (inclusive) in each of dim
  // dimensions.
  static GridSpec uniform(double low, double high, std::size_t count, std::size_t dim);

  std::size_t dim() const noexcept { return coords.size(); }
  std::size_t size() const noexcept;
  void validate() const;
};

// Points in lexicographic order with the last coordinate varying fastest.
PointSet make_grid(const GridSpec& grid);

// f drawn once from GP(0, k) over the grid with sample_prior(kernel, grid, seed).
ProblemInstance make_synthetic_instance(const KernelSpec& kernel, const GridSpec& grid,
                                        double noise_stddev, std::uint64_t seed);

// Fresh GP-prior function per replication, seeded by
// hash_key(base_seed, rep, Stream::kInstance); the factorisation is shared.
InstanceSampler synthetic_sampler(const KernelSpec& kernel, const GridSpec& grid,
                                  double noise_stddev);

// Same, over an explicit candidate set.
InstanceSampler synthetic_sampler(const KernelSpec& kernel, const PointSet& candidates,
                                  double noise_stddev);

enum class BenchmarkFunction { kHolderTable, kCrossInTray, kAckley };

struct BenchmarkInfo {
  std::string_view name;
  std::size_t dim;  // 0 when any dimension is allowed
  double lower;
  double upper;
  double optimum_value;
};

BenchmarkFunction parse_benchmark(std::string_view name);
const BenchmarkInfo& benchmark_info(BenchmarkFunction fn) noexcept;

// Negated standard form (maximisation). Throws DomainError outside the
// standard domain and ConfigError on a dimension mismatch.
double benchmark_function(BenchmarkFunction fn, std::span<const double> x);

// Benchmark problem on the unit cube with `candidates_per_iteration` fresh
// uniform candidates each round.
ProblemInstance make_benchmark_instance(BenchmarkFunction fn, std::size_t dim,
                                        std::size_t candidates_per_iteration, double noise_stddev);

struct TabularDataset {
  std::vector<std::string> feature_names;
  std::string objective_name;
  Eigen::MatrixXd raw_features;  // n x d as read
  Eigen::MatrixXd features;      // standardised
  std::vector<double> objective;
  std::vector<double> feature_mean;
  // Population standard deviation per column (1 for constant columns).
  std::vector<double> feature_scale;
};

struct TabularProblem {
  TabularDataset dataset;
  ProblemInstance instance;
};

// Comma-separated, header row first, '.' decimal point. Missing cells (empty,
// NA, NaN, null) raise IngestionError naming every affected row; other
// non-numeric cells raise ParseError with 1-based row and column.
TabularProblem ingest_tabular(const std::string& path, std::string_view objective_column,
                              double noise_stddev = 0.0);
TabularProblem parse_tabular(std::string_view text, std::string_view objective_column,
                             double noise_stddev = 0.0);

// Writes the raw table back as CSV (features in order, objective last).
void serialize_tabular(const TabularDataset& dataset, std::ostream& out);

}  // namespace irgp
