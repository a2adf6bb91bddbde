#include "irgp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irgp/errors.hpp"
#include "irgp/simd/ops.hpp"

namespace irgp {

std::string_view family_name(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::kSquaredExponential:
      return "se";
    case KernelFamily::kMatern52:
      return "matern52";
    case KernelFamily::kMatern32:
      return "matern32";
  }
  return "se";
}

KernelFamily parse_family(std::string_view name) {
  if (name == "se" || name == "rbf" || name == "gaussian") return KernelFamily::kSquaredExponential;
  if (name == "matern52") return KernelFamily::kMatern52;
  if (name == "matern32") return KernelFamily::kMatern32;
  throw ConfigError("unknown kernel family '" + std::string(name) +
                    "' (expected se, matern52 or matern32)");
}

KernelSpec KernelSpec::isotropic(KernelFamily family, double lengthscale,
                                 std::size_t dim, double signal_variance) {
  KernelSpec k{family, std::vector<double>(dim, lengthscale), signal_variance};
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (lengthscales.empty()) throw ConfigError("kernel needs at least one lengthscale");
  for (double l : lengthscales) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw ConfigError("kernel lengthscales must be positive and finite");
    }
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw ConfigError("kernel signal_variance must be positive and finite");
  }
}

double kernel_profile(const KernelSpec& kernel, double r2) noexcept {
  switch (kernel.family) {
    case KernelFamily::kSquaredExponential:
      return kernel.signal_variance * std::exp(-0.5 * r2);
    case KernelFamily::kMatern52: {
      const double s = std::sqrt(5.0 * r2);
      return kernel.signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    case KernelFamily::kMatern32: {
      const double s = std::sqrt(3.0 * r2);
      return kernel.signal_variance * (1.0 + s) * std::exp(-s);
    }
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& kernel, std::span<const double> x,
                   std::span<const double> x2) {
  if (x.size() != kernel.dim() || x2.size() != kernel.dim()) {
    throw ConfigError("kernel_eval: input dimension " + std::to_string(x.size()) + "/" +
                      std::to_string(x2.size()) + " does not match kernel dimension " +
                      std::to_string(kernel.dim()));
  }
  // Same arithmetic as kernel_row so the two agree bitwise.
  double r2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = (x2[k] - x[k]) * (1.0 / kernel.lengthscales[k]);
    r2 += d * d;
  }
  return kernel_profile(kernel, r2);
}

void kernel_row(const KernelSpec& kernel, std::span<const double> x,
                const PointSet& points, std::span<double> out) {
  if (x.size() != kernel.dim() || points.dim() != kernel.dim()) {
    throw ConfigError("kernel_row: dimension mismatch with kernel dimension " +
                      std::to_string(kernel.dim()));
  }
  const std::size_t n = points.size();
  const auto& ops = simd::active();
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    ops.accumulate_scaled_sqdiff(points.column(k).data(), x[k],
                                 1.0 / kernel.lengthscales[k], out.data(), n);
  }
  for (std::size_t j = 0; j < n; ++j) out[j] = kernel_profile(kernel, out[j]);
}

Eigen::MatrixXd gram_matrix(const KernelSpec& kernel, const PointSet& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto x = points.point(static_cast<std::size_t>(j));
    kernel_row(kernel, x, points, std::span<double>(g.col(j).data(), static_cast<std::size_t>(n)));
  }
  // Rows and columns are computed by the same formula; force exact symmetry.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) g(j, i) = g(i, j);
  }
  return g;
}

}  // namespace irgp
