#include "irgp/simd/ops.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <limits>

#define IRGP_AVX2 __attribute__((target("avx2")))

namespace irgp::simd {

namespace {

IRGP_AVX2 void accumulate_scaled_sqdiff(const double* col, double center,
                                        double inv_scale, double* acc,
                                        std::size_t n) {
  const __m256d c = _mm256_set1_pd(center);
  const __m256d s = _mm256_set1_pd(inv_scale);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(col + j), c), s);
    const __m256d a = _mm256_add_pd(_mm256_loadu_pd(acc + j), _mm256_mul_pd(d, d));
    _mm256_storeu_pd(acc + j, a);
  }
  for (; j < n; ++j) {
    const double d = (col[j] - center) * inv_scale;
    acc[j] += d * d;
  }
}

IRGP_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m256d y0 = _mm256_add_pd(_mm256_loadu_pd(y + j),
                                     _mm256_mul_pd(va, _mm256_loadu_pd(x + j)));
    const __m256d y1 = _mm256_add_pd(_mm256_loadu_pd(y + j + 4),
                                     _mm256_mul_pd(va, _mm256_loadu_pd(x + j + 4)));
    _mm256_storeu_pd(y + j, y0);
    _mm256_storeu_pd(y + j + 4, y1);
  }
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(y + j, _mm256_add_pd(_mm256_loadu_pd(y + j),
                                          _mm256_mul_pd(va, _mm256_loadu_pd(x + j))));
  }
  for (; j < n; ++j) y[j] += a * x[j];
}

IRGP_AVX2 void subtract_squares(const double* x, double* acc, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d v = _mm256_loadu_pd(x + j);
    _mm256_storeu_pd(acc + j, _mm256_sub_pd(_mm256_loadu_pd(acc + j), _mm256_mul_pd(v, v)));
  }
  for (; j < n; ++j) acc[j] -= x[j] * x[j];
}

IRGP_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    s0 = _mm256_add_pd(s0, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    s1 = _mm256_add_pd(s1, _mm256_mul_pd(_mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(y + j + 4)));
  }
  for (; j + 4 <= n; j += 4) {
    s0 = _mm256_add_pd(s0, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(s0, s1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < n; ++j) s += x[j] * y[j];
  return s;
}

IRGP_AVX2 inline __m256d ucb_scores(const double* mean, const double* var,
                                    __m256d scale, std::size_t j) {
  // max_pd(v, 0) yields 0 for NaN or non-positive v, like the scalar branch.
  const __m256d v = _mm256_max_pd(_mm256_loadu_pd(var + j), _mm256_setzero_pd());
  return _mm256_add_pd(_mm256_loadu_pd(mean + j), _mm256_mul_pd(scale, _mm256_sqrt_pd(v)));
}

inline double scalar_score(const double* mean, const double* var, double scale,
                           std::size_t j) {
  const double v = var[j] > 0.0 ? var[j] : 0.0;
  return mean[j] + scale * std::sqrt(v);
}

IRGP_AVX2 std::size_t ucb_argmax(const double* mean, const double* var,
                                 double scale, std::size_t n, double* best) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const __m256d vs = _mm256_set1_pd(scale);
  __m256d vmax = _mm256_set1_pd(kNegInf);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    // Operand order keeps vmax when the score is NaN.
    vmax = _mm256_max_pd(ucb_scores(mean, var, vs, j), vmax);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double top = kNegInf;
  for (double lane : lanes) top = lane > top ? lane : top;
  for (; j < n; ++j) {
    const double score = scalar_score(mean, var, scale, j);
    top = score > top ? score : top;
  }
  if (best != nullptr) *best = top;
  if (!(top > kNegInf)) return 0;

  const __m256d vtop = _mm256_set1_pd(top);
  j = 0;
  for (; j + 4 <= n; j += 4) {
    const int mask = _mm256_movemask_pd(
        _mm256_cmp_pd(ucb_scores(mean, var, vs, j), vtop, _CMP_EQ_OQ));
    if (mask != 0) return j + static_cast<std::size_t>(__builtin_ctz(mask));
  }
  for (; j < n; ++j) {
    if (scalar_score(mean, var, scale, j) == top) return j;
  }
  return 0;
}

constexpr Ops kAvx2Ops{
    Isa::kAvx2, "avx2", &accumulate_scaled_sqdiff, &axpy,
    &subtract_squares, &dot, &ucb_argmax,
};

}  // namespace

const Ops* avx2_ops() noexcept { return &kAvx2Ops; }

}  // namespace irgp::simd

#else

namespace irgp::simd {
const Ops* avx2_ops() noexcept { return nullptr; }
}  // namespace irgp::simd

#endif
