#include "irgp/points.hpp"

#include <string>

#include "irgp/errors.hpp"

namespace irgp {

PointSet::PointSet(const Eigen::MatrixXd& rows) : cols_(static_cast<std::size_t>(rows.cols())) {
  for (std::size_t k = 0; k < cols_.size(); ++k) {
    const auto col = rows.col(static_cast<Eigen::Index>(k));
    cols_[k].assign(col.data(), col.data() + col.size());
  }
}

void PointSet::reserve(std::size_t n) {
  for (auto& c : cols_) c.reserve(n);
}

void PointSet::push_back(std::span<const double> x) {
  if (x.size() != cols_.size()) {
    throw ConfigError("point has dimension " + std::to_string(x.size()) +
                      ", expected " + std::to_string(cols_.size()));
  }
  for (std::size_t k = 0; k < x.size(); ++k) cols_[k].push_back(x[k]);
}

std::vector<double> PointSet::point(std::size_t j) const {
  std::vector<double> x(cols_.size());
  for (std::size_t k = 0; k < cols_.size(); ++k) x[k] = cols_[k][j];
  return x;
}

Eigen::MatrixXd PointSet::matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t k = 0; k < cols_.size(); ++k) {
    for (std::size_t j = 0; j < cols_[k].size(); ++j) {
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = cols_[k][j];
    }
  }
  return m;
}

}  // namespace irgp
