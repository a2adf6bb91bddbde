#include "irgp/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>
#include <utility>

#include "irgp/errors.hpp"
#include "irgp/gp.hpp"

namespace irgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t u64(std::size_t v) { return static_cast<std::uint64_t>(v); }
std::uint64_t u64(long long v) { return static_cast<std::uint64_t>(v); }

// Extra key component separating per-iteration candidate draws from the
// TS/PIMS path draws that share the acquisition stream.
constexpr std::uint64_t kCandidateDrawTag = 0x63616e64;

std::size_t default_initial_size(std::size_t dim) {
  return dim >= 63 ? std::numeric_limits<std::size_t>::max() : (std::size_t{1} << dim);
}

// Model of f: a joint posterior over a fixed candidate set (finite mode) or a
// GP over observed inputs queried at fresh candidates (benchmark mode).
class Model {
 public:
  Model(const ProblemInstance& instance, const BoConfig& config)
      : instance_(instance), config_(config), kernel_(config.kernel),
        gp_(config.kernel, config.noise_variance), inputs_(instance.dim()) {
    if (instance.finite()) rebuild_finite();
  }

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const PointSet& inputs() const noexcept { return inputs_; }
  std::span<const double> outputs() const noexcept { return outputs_; }
  std::size_t size() const noexcept { return outputs_.size(); }

  // Finite problems condition the candidate posterior only; the
  // observation-space factor is kept for continuous candidates.
  void observe(std::span<const double> x, std::size_t index, double y) {
    inputs_.push_back(x);
    outputs_.push_back(y);
    if (finite_) {
      finite_->observe(index, y);
      observed_index_.push_back(index);
    } else {
      gp_.append(x, y);
    }
  }

  void refit() {
    if (config_.refit_grid.empty()) return;
    const KernelSpec fitted =
        fit_hyperparameters(inputs_, outputs_, config_.refit_grid, config_.noise_variance);
    if (fitted == kernel_) return;
    kernel_ = fitted;
    if (instance_.finite()) {
      rebuild_finite();
      for (std::size_t i = 0; i < observed_index_.size(); ++i) {
        finite_->observe(observed_index_[i], outputs_[i]);
      }
    } else {
      gp_ = GpState::from_data(kernel_, config_.noise_variance, inputs_, outputs_);
    }
  }

  // Posterior arrays over the current candidates.
  void posterior(const PointSet& candidates, std::vector<double>& mean,
                 std::vector<double>& variance) const {
    if (finite_) {
      mean.assign(finite_->mean().begin(), finite_->mean().end());
      variance.assign(finite_->variance().begin(), finite_->variance().end());
      return;
    }
    mean.resize(candidates.size());
    variance.resize(candidates.size());
    gp_.posterior_batch(candidates, mean, variance);
  }

 private:
  void rebuild_finite() {
    if (instance_.prior_covariance) {
      finite_.emplace(*instance_.prior_covariance, config_.noise_variance);
    } else {
      finite_.emplace(kernel_, instance_.candidates.points, config_.noise_variance);
    }
  }

  const ProblemInstance& instance_;
  const BoConfig& config_;
  KernelSpec kernel_;
  GpState gp_;
  std::optional<CandidatePosterior> finite_;
  PointSet inputs_;
  std::vector<double> outputs_;
  std::vector<std::size_t> observed_index_;
};

PointSet uniform_points(std::size_t n, std::size_t dim, Rng& rng) {
  PointSet pts(dim);
  pts.reserve(n);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform();
    pts.push_back(x);
  }
  return pts;
}

std::vector<std::size_t> initial_indices(const ProblemInstance& instance, const BoConfig& config,
                                         Rng& rng) {
  if (!config.initial_indices.empty()) return config.initial_indices;
  const std::size_t n = instance.candidates.size();
  const std::size_t k = std::min(config.initial_size.value_or(default_initial_size(instance.dim())), n);
  // Partial Fisher-Yates: k distinct indices.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(k);
  return perm;
}

}  // namespace

void ProblemInstance::validate() const {
  if (candidates.size() == 0 && candidates.provenance == CandidateProvenance::kFixedGrid) {
    throw ConfigError("problem instance has no candidates");
  }
  if (finite()) {
    if (true_values.size() != candidates.size()) {
      throw ConfigError("true_values must align with the candidate set");
    }
    if (optimum_index >= true_values.size()) throw ConfigError("optimum index out of range");
    const double best = *std::max_element(true_values.begin(), true_values.end());
    if (optimum_value != best || true_values[optimum_index] != best) {
      throw ConfigError("optimum does not match the maximum of true_values");
    }
    if (prior_covariance &&
        (prior_covariance->rows() != static_cast<Eigen::Index>(candidates.size()) ||
         prior_covariance->cols() != static_cast<Eigen::Index>(candidates.size()))) {
      throw ConfigError("prior covariance must be |X| x |X|");
    }
  } else {
    if (!objective) throw ConfigError("benchmark instance needs an objective");
    if (candidates.provenance == CandidateProvenance::kPerIterationRandom &&
        candidates.random_count == 0) {
      throw ConfigError("per-iteration random candidates need a positive count");
    }
    if (lower.size() != dim() || upper.size() != dim()) {
      throw ConfigError("benchmark instance needs lower/upper bounds per dimension");
    }
  }
  if (!(noise_stddev >= 0.0) || !std::isfinite(noise_stddev)) {
    throw ConfigError("noise standard deviation must be finite and non-negative");
  }
}

std::vector<double> ProblemInstance::to_original(std::span<const double> unit) const {
  std::vector<double> x(unit.begin(), unit.end());
  if (lower.size() == x.size() && upper.size() == x.size()) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = lower[k] + x[k] * (upper[k] - lower[k]);
  }
  return x;
}

double ProblemInstance::value_at(std::span<const double> unit) const {
  return objective(to_original(unit));
}

void set_optimum_from_values(ProblemInstance& instance) {
  if (instance.true_values.empty()) throw ConfigError("no true values to take the optimum of");
  const auto it = std::max_element(instance.true_values.begin(), instance.true_values.end());
  instance.optimum_index = static_cast<std::size_t>(it - instance.true_values.begin());
  instance.optimum_value = *it;
}

std::string_view acquisition_name(AcquisitionKind kind) noexcept {
  switch (kind) {
    case AcquisitionKind::kUcb:
      return "ucb";
    case AcquisitionKind::kEi:
      return "ei";
    case AcquisitionKind::kTs:
      return "ts";
    case AcquisitionKind::kPims:
      return "pims";
  }
  return "ucb";
}

AcquisitionKind parse_acquisition(std::string_view name) {
  if (name == "ucb") return AcquisitionKind::kUcb;
  if (name == "ei") return AcquisitionKind::kEi;
  if (name == "ts") return AcquisitionKind::kTs;
  if (name == "pims") return AcquisitionKind::kPims;
  throw ConfigError("unknown acquisition '" + std::string(name) + "' (expected ucb, ei, ts, pims)");
}

void BoConfig::validate() const {
  kernel.validate();
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw ConfigError("model noise variance must be finite and non-negative");
  }
  if (refit_period > 0 && refit_grid.empty()) {
    throw ConfigError("refit_period is set but the hyperparameter grid is empty");
  }
  for (const auto& k : refit_grid) {
    k.validate();
    if (k.dim() != kernel.dim()) throw ConfigError("refit grid kernel dimension mismatch");
  }
  if ((acquisition == AcquisitionKind::kTs || acquisition == AcquisitionKind::kPims) &&
      rff_features == 0) {
    throw ConfigError("TS/PIMS need at least one random Fourier feature");
  }
  if (zeta_sequence) {
    if (zeta_sequence->size() < static_cast<std::size_t>(horizon)) {
      throw ConfigError("fixed zeta sequence is shorter than the horizon");
    }
    for (double z : *zeta_sequence) {
      if (!(z >= 0.0)) throw ConfigError("fixed zeta values must be >= 0");
    }
  }
}

double BoTrace::cumulative_regret() const noexcept {
  return records.empty() ? 0.0 : records.back().cumulative;
}

double BoTrace::information_gain() const noexcept {
  double s = 0.0;
  for (const auto& r : records) s += r.info_gain;
  return s;
}

std::vector<std::size_t> BoTrace::selected_indices() const {
  std::vector<std::size_t> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.index);
  return out;
}

BoTrace run_bo(const ProblemInstance& instance, const BoConfig& config, std::uint64_t base_seed,
               std::size_t replication) {
  instance.validate();
  config.validate();
  if (config.kernel.dim() != instance.dim()) {
    throw ConfigError("kernel dimension " + std::to_string(config.kernel.dim()) +
                      " does not match the instance dimension " + std::to_string(instance.dim()));
  }
  if (instance.prior_covariance &&
      (config.acquisition == AcquisitionKind::kTs || config.acquisition == AcquisitionKind::kPims)) {
    throw ConfigError("TS/PIMS need a kernel prior; this instance overrides the prior covariance");
  }
  const std::uint64_t rep = u64(replication);
  const bool finite = instance.finite();

  Model model(instance, config);
  BoTrace trace;
  trace.replication = replication;
  trace.optimum_value = instance.optimum_value;

  // Initial design.
  {
    Rng design_rng = Rng::keyed({base_seed, rep, key_of(Stream::kInitialDesign)});
    Rng noise_rng = Rng::keyed({base_seed, rep, key_of(Stream::kNoise), 0});
    if (finite) {
      for (std::size_t j : initial_indices(instance, config, design_rng)) {
        if (j >= instance.candidates.size()) throw ConfigError("initial design index out of range");
        const double y = instance.true_values[j] + instance.noise_stddev * noise_rng.normal();
        model.observe(instance.candidates.points.point(j), j, y);
      }
    } else {
      const std::size_t k = config.initial_size.value_or(default_initial_size(instance.dim()));
      const PointSet pts = uniform_points(k, instance.dim(), design_rng);
      for (std::size_t i = 0; i < k; ++i) {
        const auto x = pts.point(i);
        model.observe(x, 0, instance.value_at(x) + instance.noise_stddev * noise_rng.normal());
      }
    }
    trace.initial_size = model.size();
  }

  std::vector<double> mean, variance;
  double cumulative = 0.0;
  double best_y = -std::numeric_limits<double>::infinity();
  for (double y : model.outputs()) best_y = std::max(best_y, y);

  trace.records.reserve(static_cast<std::size_t>(config.horizon));
  for (long long t = 1; t <= config.horizon; ++t) {
    const std::uint64_t tk = u64(t);
    try {
      if (config.refit_period > 0 && (static_cast<std::size_t>(t) - 1) % config.refit_period == 0) {
        model.refit();
      }

      PointSet fresh;
      const PointSet* cands = &instance.candidates.points;
      if (!finite && instance.candidates.provenance == CandidateProvenance::kPerIterationRandom) {
        Rng cand_rng = Rng::keyed({base_seed, rep, key_of(Stream::kAcquisition), tk, kCandidateDrawTag});
        fresh = uniform_points(instance.candidates.random_count, instance.dim(), cand_rng);
        cands = &fresh;
      }
      model.posterior(*cands, mean, variance);

      TraceRecord rec;
      rec.t = t;
      rec.zeta = kNaN;
      rec.shift = kNaN;
      switch (config.acquisition) {
        case AcquisitionKind::kUcb: {
          ConfidenceDraw draw;
          if (config.zeta_sequence) {
            draw = {(*config.zeta_sequence)[static_cast<std::size_t>(t - 1)],
                    schedule_shift(config.schedule, t)};
          } else {
            Rng zeta_rng = Rng::keyed({base_seed, rep, key_of(Stream::kZetaSequence), tk});
            draw = next_confidence(config.schedule, t, zeta_rng);
          }
          rec.zeta = draw.value;
          rec.shift = draw.shift;
          rec.index = ucb_argmax(mean, variance, draw.value).index;
          break;
        }
        case AcquisitionKind::kEi:
          rec.index = ei_argmax(mean, variance, std::isfinite(best_y) ? best_y : 0.0).index;
          break;
        case AcquisitionKind::kTs:
        case AcquisitionKind::kPims: {
          Rng acq_rng = Rng::keyed({base_seed, rep, key_of(Stream::kAcquisition), tk});
          const RffModel rff = build_rff(model.kernel(), config.rff_features, acq_rng());
          const Eigen::VectorXd w = sample_posterior_weights(
              rff, model.inputs(), model.outputs(), config.noise_variance, acq_rng);
          const Eigen::VectorXd path = rff.evaluate(*cands, w);
          const std::span<const double> pv(path.data(), cands->size());
          rec.index = config.acquisition == AcquisitionKind::kTs
                          ? max_entry(pv).index
                          : pi_argmax(mean, variance, path.maxCoeff()).index;
          break;
        }
      }

      rec.x = cands->point(rec.index);
      rec.mu = mean[rec.index];
      rec.sigma = std::sqrt(std::max(variance[rec.index], 0.0));
      rec.info_gain = config.noise_variance > 0.0
                          ? 0.5 * std::log1p(variance[rec.index] / config.noise_variance)
                          : kNaN;
      rec.f = finite ? instance.true_values[rec.index] : instance.value_at(rec.x);
      Rng noise_rng = Rng::keyed({base_seed, rep, key_of(Stream::kNoise), tk});
      rec.y = rec.f + instance.noise_stddev * noise_rng.normal();
      rec.regret = instance.optimum_value - rec.f;
      cumulative += rec.regret;
      rec.cumulative = cumulative;
      if (!finite) rec.index = 0;

      model.observe(rec.x, rec.index, rec.y);
      best_y = std::max(best_y, rec.y);
      trace.records.push_back(std::move(rec));
    } catch (const NumericalError& e) {
      throw NumericalError("replication " + std::to_string(replication) + ", iteration " +
                           std::to_string(t) + ": " + e.what());
    }
  }
  return trace;
}

InstanceSampler fixed_instance(ProblemInstance instance) {
  auto shared = std::make_shared<const ProblemInstance>(std::move(instance));
  return [shared](std::uint64_t, std::size_t) { return *shared; };
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<ReplicationResult> run_replications(const InstanceSampler& sampler,
                                                const BoConfig& config, std::size_t n_reps,
                                                std::uint64_t base_seed, unsigned threads) {
  if (n_reps == 0) throw ConfigError("number of replications must be >= 1");
  config.validate();
  std::vector<ReplicationResult> results(n_reps);
  parallel_for(n_reps, threads, [&](std::size_t i) {
    results[i].replication = i;
    try {
      const ProblemInstance instance = sampler(base_seed, i);
      results[i].trace = run_bo(instance, config, base_seed, i);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  });
  const bool any = std::any_of(results.begin(), results.end(),
                               [](const ReplicationResult& r) { return r.trace.has_value(); });
  if (!any) {
    throw NumericalError("all " + std::to_string(n_reps) + " replications failed; first error: " +
                         results.front().error);
  }
  return results;
}

std::vector<BoTrace> successful_traces(const std::vector<ReplicationResult>& results) {
  std::vector<BoTrace> out;
  for (const auto& r : results) {
    if (r.trace) out.push_back(*r.trace);
  }
  return out;
}

}  // namespace irgp
