#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "irgp/points.hpp"

namespace irgp {

enum class KernelFamily { kSquaredExponential, kMatern52, kMatern32 };

std::string_view family_name(KernelFamily family) noexcept;
KernelFamily parse_family(std::string_view name);

// Stationary ARD kernel. k(x, x) = signal_variance for every x.
struct KernelSpec {
  KernelFamily family = KernelFamily::kSquaredExponential;
  std::vector<double> lengthscales{1.0};
  double signal_variance = 1.0;

  static KernelSpec isotropic(KernelFamily family, double lengthscale,
                              std::size_t dim, double signal_variance = 1.0);

  std::size_t dim() const noexcept { return lengthscales.size(); }

  // Throws ConfigError on non-positive or non-finite parameters.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

// Kernel value as a function of the lengthscale-scaled squared distance.
double kernel_profile(const KernelSpec& kernel, double scaled_sqdist) noexcept;

double kernel_eval(const KernelSpec& kernel, std::span<const double> x,
                   std::span<const double> x2);

// out[j] = k(x, points_j) for all j.
void kernel_row(const KernelSpec& kernel, std::span<const double> x,
                const PointSet& points, std::span<double> out);

Eigen::MatrixXd gram_matrix(const KernelSpec& kernel, const PointSet& points);

}  // namespace irgp
