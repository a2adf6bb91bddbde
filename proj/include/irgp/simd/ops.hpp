#pragma once

// Candidate-wide arithmetic kernels with a scalar reference and an AVX2
// variant chosen at runtime.
//
// Contract shared by every implementation:
// - Unaligned inputs are fine; n may be any size including 0.
// - Elementwise kernels (accumulate_scaled_sqdiff, axpy, subtract_squares,
//   ucb_argmax) round exactly like the scalar loop: no FMA contraction, so the
//   AVX2 results are bitwise identical to the reference.
// - dot is a reduction; the vector variant uses four partial sums and agrees
//   with the reference to rounding, not bitwise.
// - The active table is resolved once from the CPU and the IRGP_SIMD
//   environment variable ("scalar", "avx2" or "auto").

#include <cstddef>
#include <string_view>

namespace irgp::simd {

enum class Isa { kScalar, kAvx2 };

struct Ops {
  Isa isa;
  std::string_view name;

  // acc[j] += ((col[j] - center) * inv_scale)^2
  void (*accumulate_scaled_sqdiff)(const double* col, double center,
                                   double inv_scale, double* acc,
                                   std::size_t n);
  // y[j] += a * x[j]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // acc[j] -= x[j]^2
  void (*subtract_squares)(const double* x, double* acc, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // First index maximising mean[j] + scale * sqrt(max(var[j], 0)). NaN
  // scores never win; returns 0 when nothing beats -inf. The winning score is
  // written to *best when best is non-null.
  std::size_t (*ucb_argmax)(const double* mean, const double* var,
                            double scale, std::size_t n, double* best);
};

const Ops& scalar_ops() noexcept;

// nullptr when the build has no AVX2 variant (non-x86 targets).
const Ops* avx2_ops() noexcept;

bool cpu_supports(Isa isa) noexcept;

const Ops& ops_for(Isa isa);

// The table used by the library.
const Ops& active() noexcept;

// Overrides the active table (tests, benchmarks). Throws ConfigError when
// the ISA is unavailable on this machine.
void set_active(Isa isa);

std::string_view isa_name(Isa isa) noexcept;

}  // namespace irgp::simd
