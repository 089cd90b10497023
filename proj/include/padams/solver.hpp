/**
 * @file solver.hpp
 * @brief Deterministic and probabilistic Adams-Bashforth / Adams-Moulton
 *        predictor-corrector integration on a uniform grid.
 *
 * One step of the probabilistic integrator draws
 *   y_{i+1} ~ N(y_i + h sum_j beta_j f_{i-j}, diag(sigma^2)),
 *   sigma = C * h^{p+1} * |alpha_hat|,
 * with beta and C taken from the conditioned Gaussian-process law and
 * alpha_hat a backward-difference estimate of y^{(p+1)} built from already
 * evaluated f values.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "padams/coeffs.hpp"
#include "padams/gp_conditioning.hpp"
#include "padams/rng.hpp"

namespace padams {

using State = std::vector<double>;

/// dy/dt = rhs(y, t) on R^dimension.
struct OdeSystem {
  std::string name;
  std::size_t dimension = 0;
  std::function<State(const State&, double)> rhs;

  [[nodiscard]] State operator()(const State& y, double t) const {
    State out = rhs(y, t);
    if (out.size() != dimension) {
      throw std::logic_error("OdeSystem '" + name + "': rhs returned " +
                             std::to_string(out.size()) + " components, expected " +
                             std::to_string(dimension));
    }
    return out;
  }
};

enum class AlphaMode { backward_difference, fixed, zero };

struct SolverConfig {
  /// adams_moulton selects the AB(s) predictor / AM(s+1) corrector pair.
  Family family = Family::adams_bashforth;
  int s = 1;
  double h = 0.01;
  double t0 = 0.0;
  double t_end = 1.0;
  State y0;
  bool probabilistic = false;
  std::uint64_t seed = 0;
  AlphaMode alpha_mode = AlphaMode::backward_difference;
  State fixed_alpha;  ///< per dimension, for AlphaMode::fixed
  /// Keep every record_stride-th grid point (the last point is always kept).
  std::size_t record_stride = 1;
  bool record_derivatives = false;

  [[nodiscard]] Scheme scheme() const noexcept { return Scheme{family, s}; }

  [[nodiscard]] bool noise_enabled() const noexcept {
    return probabilistic && alpha_mode != AlphaMode::zero;
  }

  /// Number of f values the stepper keeps: the mean needs s, the
  /// backward-difference alpha of a method of order p needs p + 1.
  [[nodiscard]] std::size_t history_depth() const noexcept {
    const int depth = noise_enabled() && alpha_mode == AlphaMode::backward_difference
                          ? scheme().order() + 1
                          : s;
    return static_cast<std::size_t>(depth);
  }

  [[nodiscard]] std::size_t step_count() const {
    const double span = (t_end - t0) / h;
    return static_cast<std::size_t>(std::ceil(span - 1e-9));
  }

  void validate(std::size_t dimension) const {
    if (s < 1 || s > kMaxSteps) {
      throw std::invalid_argument("SolverConfig: s must lie in [1, " + std::to_string(kMaxSteps) +
                                  "]");
    }
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw std::invalid_argument("SolverConfig: step size must be positive and finite");
    }
    if (!(t_end > t0) || !std::isfinite(t_end) || !std::isfinite(t0)) {
      throw std::invalid_argument("SolverConfig: need finite t_end > t0");
    }
    if ((t_end - t0) / h > 1e10) {
      throw std::invalid_argument("SolverConfig: too many steps");
    }
    if (y0.size() != dimension) {
      throw std::invalid_argument("SolverConfig: y0 has " + std::to_string(y0.size()) +
                                  " components, system has " + std::to_string(dimension));
    }
    if (alpha_mode == AlphaMode::fixed && probabilistic && fixed_alpha.size() != dimension) {
      throw std::invalid_argument("SolverConfig: fixed alpha needs one value per dimension");
    }
    if (record_stride == 0) {
      throw std::invalid_argument("SolverConfig: record_stride must be positive");
    }
  }
};

/// Most-recent-first ring of derivative evaluations.
class History {
 public:
  explicit History(std::size_t capacity = 1) : slots_(capacity) {
    if (capacity == 0) throw std::invalid_argument("History: zero capacity");
  }

  void push(State f) {
    head_ = (head_ + slots_.size() - 1) % slots_.size();
    slots_[head_] = std::move(f);
    if (size_ < slots_.size()) ++size_;
  }

  /// The value `back` steps before the newest one.
  [[nodiscard]] const State& operator[](std::size_t back) const {
    if (back >= size_) {
      throw std::out_of_range("History: only " + std::to_string(size_) + " values held");
    }
    return slots_[(head_ + back) % slots_.size()];
  }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] std::size_t capacity() const noexcept { return slots_.size(); }

 private:
  std::vector<State> slots_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

struct StepperState {
  double t0 = 0.0;
  double h = 0.0;
  std::size_t step_index = 0;  ///< the state sits at t0 + step_index * h
  State y;
  History f_history;  ///< f_history[k] = f(y_{i-k}, t_{i-k})

  [[nodiscard]] double t() const noexcept { return t0 + static_cast<double>(step_index) * h; }
};

/// Misuse of the stepper (e.g. too little history); a programming error.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The flat-array trajectory of one run, thinned by record_stride.
struct Trajectory {
  std::size_t dimension = 0;
  std::vector<double> times;
  std::vector<std::size_t> step_indices;
  std::vector<double> states;       ///< row-major, one row per recorded time
  std::vector<double> sds;          ///< injected noise sd that produced each row
  std::vector<double> alphas;       ///< noise-scale estimate used for each row
  std::vector<double> derivatives;  ///< f at each row, when recorded
  std::size_t warmup_steps = 0;
  SolverConfig config;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }

  [[nodiscard]] std::span<const double> state(std::size_t row) const {
    return {states.data() + row * dimension, dimension};
  }
  [[nodiscard]] std::span<const double> sd(std::size_t row) const {
    return {sds.data() + row * dimension, dimension};
  }
  [[nodiscard]] std::span<const double> alpha(std::size_t row) const {
    return {alphas.data() + row * dimension, dimension};
  }
  [[nodiscard]] std::span<const double> derivative(std::size_t row) const {
    return {derivatives.data() + row * dimension, dimension};
  }

  void append(std::size_t step, double t, const State& y, const State& sd_row,
              const State& alpha_row, const State* f) {
    step_indices.push_back(step);
    times.push_back(t);
    states.insert(states.end(), y.begin(), y.end());
    sds.insert(sds.end(), sd_row.begin(), sd_row.end());
    alphas.insert(alphas.end(), alpha_row.begin(), alpha_row.end());
    if (f != nullptr) {
      derivatives.insert(derivatives.end(), f->begin(), f->end());
    }
  }
};

/// The state left the finite reals; carries what was computed so far.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, Trajectory partial)
      : std::runtime_error("integration diverged at step " + std::to_string(step)),
        step_(step),
        partial_(std::move(partial)) {}

  [[nodiscard]] std::size_t step() const noexcept { return step_; }
  [[nodiscard]] const Trajectory& partial() const noexcept { return partial_; }

 private:
  std::size_t step_;
  Trajectory partial_;
};

/// Floating-point view of a ConditionalLaw.
struct StepLaw {
  Scheme scheme;
  std::vector<double> f_weights;
  double sd_constant = 0.0;
  int h_power = 0;

  explicit StepLaw(const ConditionalLaw& law)
      : scheme(law.scheme), sd_constant(to_double(law.sd_constant)), h_power(law.h_power()) {
    for (const auto& w : law.f_weights) f_weights.push_back(to_double(w));
  }
};

/// Augmented law for `scheme`, derived once per process.
[[nodiscard]] inline const ConditionalLaw& cached_law(Scheme scheme) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, ConditionalLaw> cache;
  const std::lock_guard lock(mutex);
  const auto key = std::make_pair(static_cast<int>(scheme.family), scheme.s);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, derive_law(scheme, true)).first;
  }
  return it->second;
}

/// Noise configuration resolved from a SolverConfig.
struct NoiseModel {
  bool enabled = false;
  AlphaMode mode = AlphaMode::zero;
  State fixed_alpha;

  [[nodiscard]] static NoiseModel from(const SolverConfig& config) {
    return NoiseModel{config.noise_enabled(), config.alpha_mode, config.fixed_alpha};
  }
};

/// What a single step injected, for replay checks.
struct StepRecord {
  State alpha;
  State sd;
};

namespace detail {

inline const std::vector<double>& bd_weights(int order) {
  static std::mutex mutex;
  static std::map<int, std::vector<double>> cache;
  const std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    std::vector<double> w;
    for (const auto& d : bd_coefficients(order)) w.push_back(to_double(d));
    it = cache.emplace(order, std::move(w)).first;
  }
  return it->second;
}

inline bool all_finite(const State& y) {
  for (const double v : y) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace detail

/// alpha_hat = h^{-order} sum_k delta_{k,order} f_{i-k}, componentwise: an
/// O(h) estimate of the order-th derivative of f.
[[nodiscard]] inline State estimate_alpha(const StepperState& state, int order) {
  if (order < 1) {
    throw StateError("estimate_alpha: derivative order must be positive");
  }
  const auto needed = static_cast<std::size_t>(order + 1);
  if (state.f_history.size() < needed) {
    throw StateError("estimate_alpha: need " + std::to_string(needed) + " f values, have " +
                     std::to_string(state.f_history.size()));
  }
  const auto& delta = detail::bd_weights(order);
  const std::size_t d = state.y.size();
  State alpha(d, 0.0);
  for (std::size_t k = 0; k < needed; ++k) {
    const State& f = state.f_history[k];
    for (std::size_t c = 0; c < d; ++c) alpha[c] += delta[k] * f[c];
  }
  const double scale = std::pow(state.h, -order);
  for (auto& a : alpha) a *= scale;
  return alpha;
}

namespace detail {

inline State resolve_alpha(const NoiseModel& noise, const StepperState& state, int order) {
  switch (noise.mode) {
    case AlphaMode::backward_difference:
      return estimate_alpha(state, order);
    case AlphaMode::fixed:
      return noise.fixed_alpha;
    case AlphaMode::zero:
      break;
  }
  return State(state.y.size(), 0.0);
}

/// Adds N(0, sigma^2) per component, sigma = C h^{p+1} |alpha|.
inline void inject_noise(const NoiseModel& noise, const StepLaw& law, const StepperState& state,
                         State& y, NoiseStream& rng, StepRecord* record) {
  const std::size_t d = y.size();
  State alpha(d, 0.0);
  State sd(d, 0.0);
  if (noise.enabled) {
    alpha = resolve_alpha(noise, state, law.scheme.order());
    const double scale = law.sd_constant * std::pow(state.h, law.h_power);
    for (std::size_t c = 0; c < d; ++c) {
      sd[c] = std::abs(alpha[c]) * scale;
      const double z = rng.standard_normal();
      if (sd[c] > 0.0) y[c] += sd[c] * z;
    }
  }
  if (record != nullptr) {
    record->alpha = std::move(alpha);
    record->sd = std::move(sd);
  }
}

/// y + h * sum_j weights[offset + j] * f_history[j], j < count.
inline State adams_mean(const StepperState& state, const std::vector<double>& weights,
                        std::size_t offset, std::size_t count) {
  const std::size_t d = state.y.size();
  State increment(d, 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    const State& f = state.f_history[j];
    const double w = weights[offset + j];
    for (std::size_t c = 0; c < d; ++c) increment[c] += w * f[c];
  }
  State out = state.y;
  for (std::size_t c = 0; c < d; ++c) out[c] += state.h * increment[c];
  return out;
}

inline StepperState advance(const OdeSystem& system, const StepperState& state, State y_next) {
  StepperState next{state.t0, state.h, state.step_index + 1, std::move(y_next), state.f_history};
  next.f_history.push(system(next.y, next.t()));
  return next;
}

}  // namespace detail

/// One probabilistic (or deterministic) Adams-Bashforth step followed by the
/// single f evaluation at the new state.
[[nodiscard]] inline StepperState step_ab(const OdeSystem& system, const StepperState& state,
                                          const StepLaw& law, const NoiseModel& noise,
                                          NoiseStream& rng, StepRecord* record = nullptr) {
  const auto s = static_cast<std::size_t>(law.scheme.s);
  if (state.f_history.size() < s) {
    throw StateError("step_ab: warm-up incomplete");
  }
  State y = detail::adams_mean(state, law.f_weights, 0, s);
  detail::inject_noise(noise, law, state, y, rng, record);
  if (!detail::all_finite(y)) {
    throw DivergenceError(state.step_index + 1, {});
  }
  return detail::advance(system, state, std::move(y));
}

/// AB(s) prediction, f* at the prediction, AM(s+1) correction with noise,
/// then f at the corrected state: two f evaluations per step.
[[nodiscard]] inline StepperState step_am_pc(const OdeSystem& system, const StepperState& state,
                                             const StepLaw& predictor, const StepLaw& corrector,
                                             const NoiseModel& noise, NoiseStream& rng,
                                             StepRecord* record = nullptr) {
  const auto s = static_cast<std::size_t>(predictor.scheme.s);
  if (state.f_history.size() < s || corrector.f_weights.size() != s + 1) {
    throw StateError("step_am_pc: warm-up incomplete or mismatched laws");
  }
  const State predicted = detail::adams_mean(state, predictor.f_weights, 0, s);
  if (!detail::all_finite(predicted)) {
    throw DivergenceError(state.step_index + 1, {});
  }
  const State f_star = system(predicted, state.t() + state.h);

  State y = detail::adams_mean(state, corrector.f_weights, 1, s);
  const double w_star = state.h * corrector.f_weights.front();
  for (std::size_t c = 0; c < y.size(); ++c) y[c] += w_star * f_star[c];
  detail::inject_noise(noise, corrector, state, y, rng, record);
  if (!detail::all_finite(y)) {
    throw DivergenceError(state.step_index + 1, {});
  }
  return detail::advance(system, state, std::move(y));
}

/// Integrates from t0 across `steps` grid intervals with an embedded
/// Fehlberg 7(8) pair used as a fixed-step 8th order method, two substeps
/// per interval. Returns the states at the new grid points.
[[nodiscard]] inline std::vector<State> runge_kutta_grid(const OdeSystem& system, State y,
                                                         double t0, double h, std::size_t steps) {
  constexpr int kSubsteps = 2;
  boost::numeric::odeint::runge_kutta_fehlberg78<State> stepper;
  auto rhs = [&system](const State& x, State& dxdt, double t) { dxdt = system(x, t); };
  std::vector<State> out;
  out.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t_start = t0 + static_cast<double>(k) * h;
    for (int sub = 0; sub < kSubsteps; ++sub) {
      stepper.do_step(rhs, y, t_start + sub * (h / kSubsteps), h / kSubsteps);
    }
    out.push_back(y);
  }
  return out;
}

/// Fills the f history with one-step values on the grid t0, t0 + h, ...:
/// s values for the mean, one more per derivative order the alpha estimate
/// needs. For s = 1 without noise this is just f(y0, t0).
[[nodiscard]] inline StepperState rk_init(const OdeSystem& system, const SolverConfig& config,
                                          Trajectory* record = nullptr) {
  config.validate(system.dimension);
  const std::size_t depth = config.history_depth();
  const std::size_t warmup = std::min(depth - 1, config.step_count());
  const std::vector<State> grid = runge_kutta_grid(system, config.y0, config.t0, config.h, warmup);

  StepperState state{config.t0, config.h, 0, config.y0, History(depth)};
  const State zeros(system.dimension, 0.0);
  auto push = [&](std::size_t step, const State& y) {
    state.step_index = step;
    state.y = y;
    state.f_history.push(system(y, state.t()));
    if (record != nullptr &&
        (step % config.record_stride == 0 || step == config.step_count())) {
      record->append(step, state.t(), y, zeros, zeros,
                     config.record_derivatives ? &state.f_history[0] : nullptr);
    }
  };
  push(0, config.y0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!detail::all_finite(grid[k])) {
      throw DivergenceError(k + 1, record != nullptr ? *record : Trajectory{});
    }
    push(k + 1, grid[k]);
  }
  if (record != nullptr) record->warmup_steps = warmup;
  return state;
}

/// Full run: warm-up, then repeated stepping to t_end. A deterministic
/// function of (system, config), seed included.
[[nodiscard]] inline Trajectory solve(const OdeSystem& system, const SolverConfig& config) {
  Trajectory traj;
  traj.dimension = system.dimension;
  traj.config = config;
  StepperState state = rk_init(system, config, &traj);

  const std::size_t steps = config.step_count();
  const Scheme scheme = config.scheme();
  const StepLaw law(cached_law(scheme));
  const StepLaw predictor(cached_law(Scheme{Family::adams_bashforth, config.s}));
  const NoiseModel noise = NoiseModel::from(config);
  NoiseStream rng(config.seed);
  StepRecord record;

  while (state.step_index < steps) {
    try {
      state = config.family == Family::adams_bashforth
                  ? step_ab(system, state, law, noise, rng, &record)
                  : step_am_pc(system, state, predictor, law, noise, rng, &record);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.step(), std::move(traj));
    }
    if (state.step_index % config.record_stride == 0 || state.step_index == steps) {
      traj.append(state.step_index, state.t(), state.y, record.sd, record.alpha,
                  config.record_derivatives ? &state.f_history[0] : nullptr);
    }
  }
  return traj;
}

}  // namespace padams
