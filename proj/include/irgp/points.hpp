#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace irgp {

// A set of n points in R^d stored one coordinate column at a time, so the
// candidate-wide kernels stream over contiguous memory.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : cols_(dim) {}

  // Rows of `rows` are points.
  explicit PointSet(const Eigen::MatrixXd& rows);

  std::size_t size() const noexcept { return cols_.empty() ? 0 : cols_[0].size(); }
  std::size_t dim() const noexcept { return cols_.size(); }
  bool empty() const noexcept { return size() == 0; }

  void reserve(std::size_t n);
  void push_back(std::span<const double> x);

  double coord(std::size_t j, std::size_t k) const noexcept { return cols_[k][j]; }
  std::span<const double> column(std::size_t k) const noexcept { return cols_[k]; }
  std::vector<double> point(std::size_t j) const;

  Eigen::MatrixXd matrix() const;

  bool operator==(const PointSet&) const = default;

 private:
  std::vector<std::vector<double>> cols_;
};

}  // namespace irgp
