#include "irgp/confidence.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

#include <boost/math/distributions/gamma.hpp>

#include "irgp/errors.hpp"

namespace irgp {

namespace {

using std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_t(long long t) { require(t >= 1, "iteration index t must be >= 1"); }

void require_delta(double delta) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
}

void require_assumption_constants(double a, double b, double r, int d) {
  require(a > 0.0 && std::isfinite(a), "constant a must be positive");
  require(b > 0.0 && std::isfinite(b), "constant b must be positive");
  require(r > 0.0 && std::isfinite(r), "constant r must be positive");
  require(d >= 1, "dimension d must be >= 1");
  require(a * d > 1.0, "a*d must exceed 1 so that sqrt(log(a d)) is defined");
}

double grid_factor(double a, int d) { return std::sqrt(std::log(a * d)) + std::sqrt(pi) / 2.0; }

}  // namespace

ConfidenceSchedule::ConfidenceSchedule(Variant v) : v_(v) {
  std::visit(
      Overloaded{
          [](const schedule::Constant& s) {
            require(s.c >= 0.0 && std::isfinite(s.c), "constant confidence must be >= 0");
          },
          [](const schedule::DeterministicUcb& s) {
            require(s.domain_size >= 1, "domain size must be >= 1");
            require_delta(s.delta);
          },
          [](const schedule::GammaRandomized& s) {
            require(s.domain_size >= 1, "domain size must be >= 1");
            require(s.theta > 0.0 && std::isfinite(s.theta), "gamma scale theta must be positive");
          },
          [](const schedule::ShiftedExpFinite& s) {
            require(s.domain_size >= 2,
                    "shifted-exponential finite schedule needs domain size >= 2 "
                    "(2 log(|X|/2) would be negative)");
          },
          [](const schedule::ShiftedExpContinuous& s) {
            require_assumption_constants(s.a, s.b, s.r, s.d);
          },
          [](const schedule::ShiftedExpHighProb& s) {
            require(s.domain_size >= 1, "domain size must be >= 1");
            require_delta(s.delta);
          },
          [](const schedule::HeuristicUcb& s) { require(s.d >= 1, "dimension d must be >= 1"); },
          [](const schedule::HeuristicShiftedExp& s) {
            require(s.d >= 1, "dimension d must be >= 1");
          },
          [](const schedule::HeuristicGamma& s) {
            require(s.d >= 1, "dimension d must be >= 1");
            require(s.theta > 0.0 && std::isfinite(s.theta), "gamma scale theta must be positive");
          },
      },
      v_);
}

bool ConfidenceSchedule::randomized() const noexcept {
  return !std::holds_alternative<schedule::Constant>(v_) &&
         !std::holds_alternative<schedule::DeterministicUcb>(v_) &&
         !std::holds_alternative<schedule::HeuristicUcb>(v_);
}

bool ConfidenceSchedule::shifted_exponential() const noexcept {
  return randomized() && !std::holds_alternative<schedule::GammaRandomized>(v_) &&
         !std::holds_alternative<schedule::HeuristicGamma>(v_);
}

std::string ConfidenceSchedule::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const schedule::Constant& s) { os << "Constant(c=" << s.c << ")"; },
                 [&](const schedule::DeterministicUcb& s) {
                   os << "DeterministicUcb(|X|=" << s.domain_size << ", delta=" << s.delta << ")";
                 },
                 [&](const schedule::GammaRandomized& s) {
                   os << "GammaRandomized(|X|=" << s.domain_size << ", theta=" << s.theta << ")";
                 },
                 [&](const schedule::ShiftedExpFinite& s) {
                   os << "ShiftedExpFinite(|X|=" << s.domain_size << ")";
                 },
                 [&](const schedule::ShiftedExpContinuous& s) {
                   os << "ShiftedExpContinuous(a=" << s.a << ", b=" << s.b << ", r=" << s.r
                      << ", d=" << s.d << ")";
                 },
                 [&](const schedule::ShiftedExpHighProb& s) {
                   os << "ShiftedExpHighProb(|X|=" << s.domain_size << ", delta=" << s.delta
                      << ")";
                 },
                 [&](const schedule::HeuristicUcb& s) { os << "HeuristicUcb(d=" << s.d << ")"; },
                 [&](const schedule::HeuristicShiftedExp& s) {
                   os << "HeuristicShiftedExp(d=" << s.d << ")";
                 },
                 [&](const schedule::HeuristicGamma& s) {
                   os << "HeuristicGamma(d=" << s.d << ", theta=" << s.theta << ")";
                 },
             },
             v_);
  return os.str();
}

double sample_shifted_exponential(double s, double lambda, Rng& rng) {
  require(lambda > 0.0 && std::isfinite(lambda), "exponential rate must be positive");
  return s - std::log(rng.uniform()) / lambda;
}

double shift_finite(std::size_t domain_size) {
  require(domain_size >= 2, "shift_finite needs domain size >= 2");
  return 2.0 * std::log(static_cast<double>(domain_size) / 2.0);
}

double shift_continuous(double a, double b, double r, int d, long long t) {
  require_assumption_constants(a, b, r, d);
  require_t(t);
  const double td = static_cast<double>(t);
  const double arg = b * d * r * td * td * grid_factor(a, d);
  require(arg > 0.0 && std::isfinite(arg), "continuous shift: log argument must be positive");
  return 2.0 * d * std::log(arg) - 2.0 * std::log(2.0);
}

double beta_deterministic(std::size_t domain_size, long long t, double delta) {
  require(domain_size >= 1, "domain size must be >= 1");
  require_t(t);
  require_delta(delta);
  const double td = static_cast<double>(t);
  return 2.0 * std::log(static_cast<double>(domain_size) * td * td * pi * pi / (6.0 * delta));
}

double shift_high_prob(std::size_t domain_size, long long t, double delta) {
  return beta_deterministic(domain_size, t, delta);
}

double gamma_shape(std::size_t domain_size, long long t) {
  require_t(t);
  const double td = static_cast<double>(t);
  const double kappa = std::log(static_cast<double>(domain_size) * td * td) / std::log(1.5);
  require(kappa > 0.0, "Gamma shape log(|X| t^2)/log(1.5) must be positive (needs |X| t^2 > 1)");
  return kappa;
}

double heuristic_gamma_shape(int d, long long t) { return heuristic_beta(d, t); }

namespace {

double sample_gamma(double kappa, double theta, Rng& rng) {
  require(theta > 0.0 && std::isfinite(theta), "gamma scale theta must be positive");
  // The standard sampler may consume a variable number of outputs; run it on
  // a child so the parent advances exactly once.
  Rng child = rng.split();
  std::gamma_distribution<double> dist(kappa, theta);
  return dist(child);
}

// (shape, scale) of the Gamma schedules; nullopt for the others.
std::optional<std::pair<double, double>> gamma_params(const ConfidenceSchedule& schedule,
                                                      long long t) {
  if (const auto* g = std::get_if<schedule::GammaRandomized>(&schedule.variant())) {
    return std::pair{gamma_shape(g->domain_size, t), g->theta};
  }
  if (const auto* g = std::get_if<schedule::HeuristicGamma>(&schedule.variant())) {
    return std::pair{heuristic_gamma_shape(g->d, t), g->theta};
  }
  return std::nullopt;
}

}  // namespace

double sample_gamma_confidence(std::size_t domain_size, long long t, double theta, Rng& rng) {
  return sample_gamma(gamma_shape(domain_size, t), theta, rng);
}

double heuristic_beta(int d, long long t) {
  require(d >= 1, "dimension d must be >= 1");
  require_t(t);
  return 0.2 * d * std::log(2.0 * static_cast<double>(t));
}

double heuristic_shift(int d) {
  require(d >= 1, "dimension d must be >= 1");
  return d / 2.0;
}

double discretization_tau(double a, double b, double r, int d, double u) {
  require_assumption_constants(a, b, r, d);
  require(u > 0.0 && std::isfinite(u), "u_t must be positive");
  return b * d * r * u * grid_factor(a, d);
}

std::size_t discretization_grid_size(double a, double b, double r, int d, double u) {
  return static_cast<std::size_t>(std::ceil(discretization_tau(a, b, r, d, u)));
}

std::vector<double> discretization_coordinates(double a, double b, double r, int d, double u) {
  const std::size_t n = discretization_grid_size(a, b, r, d, u);
  std::vector<double> coords(n);
  for (std::size_t i = 0; i < n; ++i) {
    coords[i] = static_cast<double>(i + 1) * r / static_cast<double>(n + 1);
  }
  return coords;
}

double schedule_shift(const ConfidenceSchedule& schedule, long long t) {
  require_t(t);
  return std::visit(
      Overloaded{
          [](const schedule::Constant& s) { return s.c; },
          [&](const schedule::DeterministicUcb& s) {
            return beta_deterministic(s.domain_size, t, s.delta);
          },
          [](const schedule::GammaRandomized&) { return 0.0; },
          [](const schedule::HeuristicGamma&) { return 0.0; },
          [](const schedule::ShiftedExpFinite& s) { return shift_finite(s.domain_size); },
          [&](const schedule::ShiftedExpContinuous& s) {
            return shift_continuous(s.a, s.b, s.r, s.d, t);
          },
          [&](const schedule::ShiftedExpHighProb& s) {
            return shift_high_prob(s.domain_size, t, s.delta);
          },
          [&](const schedule::HeuristicUcb& s) { return heuristic_beta(s.d, t); },
          [](const schedule::HeuristicShiftedExp& s) { return heuristic_shift(s.d); },
      },
      schedule.variant());
}

ConfidenceDraw next_confidence(const ConfidenceSchedule& schedule, long long t, Rng& rng) {
  const double shift = schedule_shift(schedule, t);
  if (!schedule.randomized()) return {shift, shift};
  if (const auto g = gamma_params(schedule, t)) return {sample_gamma(g->first, g->second, rng), 0.0};
  return {sample_shifted_exponential(shift, kShiftedExpRate, rng), shift};
}

double confidence_mean(const ConfidenceSchedule& schedule, long long t) {
  if (const auto g = gamma_params(schedule, t)) return g->first * g->second;
  const double shift = schedule_shift(schedule, t);
  return schedule.randomized() ? shift + 1.0 / kShiftedExpRate : shift;
}

double confidence_quantile(const ConfidenceSchedule& schedule, long long t, double q) {
  require(q > 0.0 && q < 1.0, "quantile level must lie in (0, 1)");
  if (const auto g = gamma_params(schedule, t)) {
    boost::math::gamma_distribution<double> dist(g->first, g->second);
    return boost::math::quantile(dist, q);
  }
  const double shift = schedule_shift(schedule, t);
  return schedule.randomized() ? shift - std::log1p(-q) / kShiftedExpRate : shift;
}

}  // namespace irgp
