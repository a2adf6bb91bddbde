#pragma once

#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "irgp/rng.hpp"

namespace irgp {

// Rate of the exponential part of every shifted-exponential schedule.
inline constexpr double kShiftedExpRate = 0.5;

namespace schedule {

struct Constant {
  double c = 1.0;
  bool operator==(const Constant&) const = default;
};
struct DeterministicUcb {
  std::size_t domain_size = 1;
  double delta = 0.1;
  bool operator==(const DeterministicUcb&) const = default;
};
struct GammaRandomized {
  std::size_t domain_size = 1;
  double theta = 1.0;
  bool operator==(const GammaRandomized&) const = default;
};
struct ShiftedExpFinite {
  std::size_t domain_size = 2;
  bool operator==(const ShiftedExpFinite&) const = default;
};
struct ShiftedExpContinuous {
  double a = 0.0;
  double b = 0.0;
  double r = 0.0;
  int d = 1;
  bool operator==(const ShiftedExpContinuous&) const = default;
};
struct ShiftedExpHighProb {
  std::size_t domain_size = 1;
  double delta = 0.1;
  bool operator==(const ShiftedExpHighProb&) const = default;
};
struct HeuristicUcb {
  int d = 1;
  bool operator==(const HeuristicUcb&) const = default;
};
struct HeuristicShiftedExp {
  int d = 1;
  bool operator==(const HeuristicShiftedExp&) const = default;
};
// Gamma(kappa_t = 0.2 d log(2t), theta): the RGP-UCB companion of HeuristicUcb.
struct HeuristicGamma {
  int d = 1;
  double theta = 1.0;
  bool operator==(const HeuristicGamma&) const = default;
};

}  // namespace schedule

template <class S, class V>
struct IsScheduleAlternative : std::false_type {};
template <class S, class... Ts>
struct IsScheduleAlternative<S, std::variant<Ts...>>
    : std::bool_constant<(std::is_same_v<S, Ts> || ...)> {};
template <class S, class V>
concept ScheduleAlternative = IsScheduleAlternative<S, V>::value;

// How the confidence parameter beta_t / zeta_t is produced at each iteration.
// Construction validates the parameters and throws ConfigError.
class ConfidenceSchedule {
 public:
  using Variant = std::variant<schedule::Constant, schedule::DeterministicUcb,
                               schedule::GammaRandomized, schedule::ShiftedExpFinite,
                               schedule::ShiftedExpContinuous, schedule::ShiftedExpHighProb,
                               schedule::HeuristicUcb, schedule::HeuristicShiftedExp,
                               schedule::HeuristicGamma>;

  ConfidenceSchedule(Variant v);  // NOLINT(google-explicit-constructor)
  template <class S>
    requires ScheduleAlternative<S, Variant>
  ConfidenceSchedule(S s) : ConfidenceSchedule(Variant(s)) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const noexcept { return v_; }
  bool randomized() const noexcept;
  bool shifted_exponential() const noexcept;
  std::string describe() const;

  bool operator==(const ConfidenceSchedule&) const = default;

 private:
  Variant v_;
};

struct ConfidenceDraw {
  double value = 0.0;
  double shift = 0.0;
};

// s + Z with Z ~ Exp(lambda) by inverse transform: Z = -log(U) / lambda.
double sample_shifted_exponential(double s, double lambda, Rng& rng);

double shift_finite(std::size_t domain_size);
double shift_continuous(double a, double b, double r, int d, long long t);
double beta_deterministic(std::size_t domain_size, long long t, double delta);
double shift_high_prob(std::size_t domain_size, long long t, double delta);

double gamma_shape(std::size_t domain_size, long long t);
double heuristic_gamma_shape(int d, long long t);
// Gamma(shape = gamma_shape(|X|, t), scale = theta). Consumes exactly one
// output of rng.
double sample_gamma_confidence(std::size_t domain_size, long long t, double theta, Rng& rng);

double heuristic_beta(int d, long long t);
double heuristic_shift(int d);

// tau = b d r u (sqrt(log(a d)) + sqrt(pi) / 2) before rounding.
double discretization_tau(double a, double b, double r, int d, double u);
std::size_t discretization_grid_size(double a, double b, double r, int d, double u);
// Per-coordinate grid r/(n+1), ..., n r/(n+1) for n = discretization_grid_size.
std::vector<double> discretization_coordinates(double a, double b, double r, int d, double u);

// Deterministic part s_t (beta_t for deterministic schedules, 0 for Gamma).
double schedule_shift(const ConfidenceSchedule& schedule, long long t);

// One draw for iteration t. Deterministic schedules leave rng untouched;
// randomized ones advance it by exactly one output.
ConfidenceDraw next_confidence(const ConfidenceSchedule& schedule, long long t, Rng& rng);

double confidence_mean(const ConfidenceSchedule& schedule, long long t);
// Analytic q-quantile of zeta_t (deterministic schedules return beta_t).
double confidence_quantile(const ConfidenceSchedule& schedule, long long t, double q);

}  // namespace irgp
