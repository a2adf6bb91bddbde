#include <cmath>
#include <limits>

#include "irgp/simd/ops.hpp"

namespace irgp::simd {

namespace {

void accumulate_scaled_sqdiff(const double* col, double center,
                              double inv_scale, double* acc, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double d = (col[j] - center) * inv_scale;
    acc[j] += d * d;
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

void subtract_squares(const double* x, double* acc, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) acc[j] -= x[j] * x[j];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += x[j] * y[j];
  return s;
}

std::size_t ucb_argmax(const double* mean, const double* var, double scale,
                       std::size_t n, double* best) {
  double top = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = var[j] > 0.0 ? var[j] : 0.0;
    const double score = mean[j] + scale * std::sqrt(v);
    if (score > top) {
      top = score;
      arg = j;
    }
  }
  if (best != nullptr) *best = top;
  return arg;
}

constexpr Ops kScalarOps{
    Isa::kScalar, "scalar", &accumulate_scaled_sqdiff, &axpy,
    &subtract_squares, &dot, &ucb_argmax,
};

}  // namespace

const Ops& scalar_ops() noexcept { return kScalarOps; }

}  // namespace irgp::simd
