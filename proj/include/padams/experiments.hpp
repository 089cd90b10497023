/**
 * @file experiments.hpp
 * @brief Ensembles, summaries, convergence studies and the divergence-time
 *        statistic used by the command-line harness.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "padams/csv.hpp"
#include "padams/models.hpp"
#include "padams/solver.hpp"

namespace padams {

/// Runs fn(0), ..., fn(n-1) on up to `threads` workers (0: one per core).
/// The first exception thrown by any call is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        fn(k);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

struct ReplicateResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  bool diverged = false;
  std::size_t divergence_step = 0;
  double wall_seconds = 0.0;
};

/// n independent solves of `base`, replicate r seeded with
/// replicate_seed(base_seed, r). Diverged replicates keep their partial
/// trajectory and are flagged. Results are ordered by replicate index.
[[nodiscard]] inline std::vector<ReplicateResult> run_ensemble(const OdeSystem& system,
                                                               const SolverConfig& base,
                                                               std::size_t n,
                                                               std::uint64_t base_seed,
                                                               std::size_t threads = 0) {
  if (n == 0) throw std::invalid_argument("run_ensemble: need at least one replicate");
  base.validate(system.dimension);
  (void)cached_law(base.scheme());
  std::vector<ReplicateResult> results(n);
  parallel_for(n, threads, [&](std::size_t r) {
    ReplicateResult& out = results[r];
    SolverConfig config = base;
    config.seed = replicate_seed(base_seed, r);
    out.index = r;
    out.seed = config.seed;
    const auto start = std::chrono::steady_clock::now();
    try {
      out.trajectory = solve(system, config);
    } catch (const DivergenceError& e) {
      out.trajectory = e.partial();
      out.diverged = true;
      out.divergence_step = e.step();
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return results;
}

/// Per-time-point mean and sample sd (n - 1 denominator, 0 for a single
/// value) across replicates; rows missing from diverged replicates are
/// skipped.
struct EnsembleSummary {
  std::size_t dimension = 0;
  std::vector<double> times;
  std::vector<std::size_t> counts;
  std::vector<double> mean;  ///< row-major, times.size() x dimension
  std::vector<double> sd;

  [[nodiscard]] double mean_at(std::size_t row, std::size_t c) const {
    return mean[row * dimension + c];
  }
  [[nodiscard]] double sd_at(std::size_t row, std::size_t c) const {
    return sd[row * dimension + c];
  }
};

[[nodiscard]] inline EnsembleSummary summarize(const std::vector<const Trajectory*>& runs) {
  if (runs.empty()) throw std::invalid_argument("summarize: no trajectories");
  EnsembleSummary out;
  out.dimension = runs.front()->dimension;
  const Trajectory* longest = runs.front();
  for (const auto* t : runs) {
    if (t->dimension != out.dimension) throw std::invalid_argument("summarize: mixed dimensions");
    if (t->size() > longest->size()) longest = t;
  }
  const std::size_t d = out.dimension;
  out.times = longest->times;
  out.counts.assign(out.times.size(), 0);
  out.mean.assign(out.times.size() * d, 0.0);
  out.sd.assign(out.times.size() * d, 0.0);
  for (std::size_t row = 0; row < out.times.size(); ++row) {
    for (const auto* t : runs) {
      if (row >= t->size()) continue;
      ++out.counts[row];
      for (std::size_t c = 0; c < d; ++c) out.mean[row * d + c] += t->states[row * d + c];
    }
    const auto n = static_cast<double>(out.counts[row]);
    for (std::size_t c = 0; c < d; ++c) out.mean[row * d + c] /= n;
    if (out.counts[row] < 2) continue;
    for (const auto* t : runs) {
      if (row >= t->size()) continue;
      for (std::size_t c = 0; c < d; ++c) {
        const double dev = t->states[row * d + c] - out.mean[row * d + c];
        out.sd[row * d + c] += dev * dev;
      }
    }
    for (std::size_t c = 0; c < d; ++c) {
      out.sd[row * d + c] = std::sqrt(out.sd[row * d + c] / (n - 1.0));
    }
  }
  return out;
}

[[nodiscard]] inline EnsembleSummary summarize(const std::vector<ReplicateResult>& results) {
  std::vector<const Trajectory*> runs;
  for (const auto& r : results) runs.push_back(&r.trajectory);
  return summarize(runs);
}

[[nodiscard]] inline EnsembleSummary summarize(const std::vector<Trajectory>& trajectories) {
  std::vector<const Trajectory*> runs;
  for (const auto& t : trajectories) runs.push_back(&t);
  return summarize(runs);
}

// ---- CSV ------------------------------------------------------------------

inline void write_trajectories(std::ostream& out, const std::vector<ReplicateResult>& results) {
  if (results.empty()) return;
  const std::size_t d = results.front().trajectory.dimension;
  std::vector<std::string> fields{"replicate", "t"};
  for (std::size_t c = 0; c < d; ++c) fields.push_back("dim" + std::to_string(c));
  write_csv_row(out, fields);
  for (const auto& r : results) {
    const auto& traj = r.trajectory;
    for (std::size_t row = 0; row < traj.size(); ++row) {
      fields = {std::to_string(r.index), format_real(traj.times[row])};
      for (const double v : traj.state(row)) fields.push_back(format_real(v));
      write_csv_row(out, fields);
    }
  }
}

/// Inverse of write_trajectories: one Trajectory (times and states only)
/// per replicate, in replicate order.
[[nodiscard]] inline std::vector<Trajectory> read_trajectories(std::istream& in) {
  const CsvTable table = read_csv(in);
  if (table.header.size() < 3 || table.header[0] != "replicate" || table.header[1] != "t") {
    throw std::invalid_argument("read_trajectories: unexpected header");
  }
  const std::size_t d = table.header.size() - 2;
  std::map<std::size_t, Trajectory> by_replicate;
  for (const auto& row : table.rows) {
    auto& traj = by_replicate[std::stoull(row[0])];
    traj.dimension = d;
    traj.times.push_back(parse_real(row[1]));
    for (std::size_t c = 0; c < d; ++c) traj.states.push_back(parse_real(row[2 + c]));
  }
  std::vector<Trajectory> out;
  for (auto& [index, traj] : by_replicate) out.push_back(std::move(traj));
  return out;
}

inline void write_summary(std::ostream& out, const EnsembleSummary& summary) {
  std::vector<std::string> fields{"t"};
  for (std::size_t c = 0; c < summary.dimension; ++c) {
    fields.push_back("mean_dim" + std::to_string(c));
    fields.push_back("sd_dim" + std::to_string(c));
  }
  write_csv_row(out, fields);
  for (std::size_t row = 0; row < summary.times.size(); ++row) {
    fields = {format_real(summary.times[row])};
    for (std::size_t c = 0; c < summary.dimension; ++c) {
      fields.push_back(format_real(summary.mean_at(row, c)));
      fields.push_back(format_real(summary.sd_at(row, c)));
    }
    write_csv_row(out, fields);
  }
}

inline void write_replicates(std::ostream& out, const std::vector<ReplicateResult>& results) {
  write_csv_row(out, {"replicate", "seed", "diverged", "divergence_step"});
  for (const auto& r : results) {
    write_csv_row(out, {std::to_string(r.index), std::to_string(r.seed), r.diverged ? "1" : "0",
                        std::to_string(r.divergence_step)});
  }
}

// ---- Reference solutions and divergence time --------------------------------

/// Deterministic AM-PC (AB5 predictor, AM6 corrector) solve of a model.
[[nodiscard]] inline Trajectory reference_solve(const ModelSpec& model, double h_ref,
                                                double t_end, std::size_t record_stride = 1) {
  SolverConfig config;
  config.family = Family::adams_moulton;
  config.s = 5;
  config.h = h_ref;
  config.t_end = t_end;
  config.y0 = model.y0;
  config.record_stride = record_stride;
  return solve(model.system, config);
}

/// Half the peak-to-peak range of one component.
[[nodiscard]] inline double attractor_amplitude(const Trajectory& traj, std::size_t component) {
  if (traj.size() == 0) throw std::invalid_argument("attractor_amplitude: empty trajectory");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t row = 0; row < traj.size(); ++row) {
    lo = std::min(lo, traj.state(row)[component]);
    hi = std::max(hi, traj.state(row)[component]);
  }
  return 0.5 * (hi - lo);
}

struct DivergenceTime {
  double time = 0.0;
  bool censored = false;  ///< threshold never crossed; time is the last time
};

/// First time the ensemble sd of `component` exceeds `threshold`.
[[nodiscard]] inline DivergenceTime divergence_time(const EnsembleSummary& summary,
                                                    std::size_t component, double threshold) {
  if (summary.times.empty()) throw std::invalid_argument("divergence_time: empty summary");
  for (std::size_t row = 0; row < summary.times.size(); ++row) {
    const double sd = summary.sd_at(row, component);
    if (!(sd <= threshold)) return {summary.times[row], false};
  }
  return {summary.times.back(), true};
}

// ---- Convergence study -------------------------------------------------------

struct ConvergenceOptions {
  Family family = Family::adams_bashforth;
  std::vector<int> steps;
  std::vector<double> hs;
  std::size_t n = 200;
  std::uint64_t seed = 0;
  double probe_t = 10.0;
  std::size_t component = 0;
  bool probabilistic = true;
  std::size_t threads = 0;
  /// Cells whose mean |error| is within this factor of the reference floor
  /// are flagged floor-limited.
  double floor_factor = 10.0;
};

struct ConvergenceCell {
  int s = 0;
  double h = 0.0;
  std::vector<double> signed_errors;  ///< approximation minus reference
  std::size_t diverged = 0;
  double mean_abs_error = 0.0;
  double mean_signed_error = 0.0;
  double signed_standard_error = 0.0;
  bool floor_limited = false;
};

struct SlopeFit {
  int s = 0;
  double slope = 0.0;
  double standard_error = 0.0;
  bool floor_limited = false;
};

struct ConvergenceReport {
  std::string model;
  std::string reference;
  double reference_value = 0.0;
  double reference_floor = 0.0;
  std::vector<ConvergenceCell> cells;
  std::vector<SlopeFit> fits;

  [[nodiscard]] const ConvergenceCell& cell(int s, double h) const {
    for (const auto& c : cells) {
      if (c.s == s && std::abs(c.h - h) <= 1e-12 * h) return c;
    }
    throw std::out_of_range("no convergence cell for s=" + std::to_string(s));
  }
  [[nodiscard]] const SlopeFit& fit(int s) const {
    for (const auto& f : fits) {
      if (f.s == s) return f;
    }
    throw std::out_of_range("no slope fit for s=" + std::to_string(s));
  }
};

/// Ordinary least squares of y on x: slope and its standard error.
[[nodiscard]] inline std::pair<double, double> fit_slope(const std::vector<double>& x,
                                                         const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit_slope: need matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
  const double slope = sxy / sxx;
  if (n == 2) return {slope, 0.0};
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - my - slope * (x[k] - mx);
    ssr += r * r;
  }
  return {slope, std::sqrt(ssr / static_cast<double>(n - 2) / sxx)};
}

/// Signed errors at probe_t for every (s, h) cell and log-log slopes of
/// mean |error| against h. Ground truth is the closed form when the model
/// has one, else a deterministic AM-PC reference at h_min / 50 whose floor
/// is estimated by comparing against the same solve at twice that step.
[[nodiscard]] inline ConvergenceReport run_convergence(const ModelSpec& model,
                                                       const ConvergenceOptions& options) {
  if (options.steps.empty()) throw std::invalid_argument("run_convergence: empty step list");
  if (options.hs.size() < 4) {
    throw std::invalid_argument("run_convergence: slope fits need at least 4 step sizes");
  }
  if (options.n == 0) throw std::invalid_argument("run_convergence: need replicates");
  if (!(options.probe_t > 0.0)) throw std::invalid_argument("run_convergence: probe_t <= 0");
  if (options.component >= model.system.dimension) {
    throw std::invalid_argument("run_convergence: component out of range");
  }
  for (const double h : options.hs) {
    if (!(h > 0.0)) throw std::invalid_argument("run_convergence: step sizes must be positive");
    const double steps = options.probe_t / h;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
      throw std::invalid_argument("run_convergence: probe_t must be a multiple of every h");
    }
  }

  ConvergenceReport report;
  report.model = model.name;
  const double h_min = *std::min_element(options.hs.begin(), options.hs.end());
  if (model.exact) {
    report.reference = "closed form";
    report.reference_value = model.exact(options.probe_t)[options.component];
  } else {
    const double h_ref = h_min / 50.0;
    const Trajectory fine = reference_solve(model, h_ref, options.probe_t, 1u << 30);
    const Trajectory coarse = reference_solve(model, 2.0 * h_ref, options.probe_t, 1u << 30);
    report.reference = "AM-PC s=5, h=" + format_real(h_ref);
    report.reference_value = fine.state(fine.size() - 1)[options.component];
    report.reference_floor =
        std::abs(report.reference_value - coarse.state(coarse.size() - 1)[options.component]);
  }

  for (const int s : options.steps) {
    std::vector<double> log_h;
    std::vector<double> log_err;
    bool any_floor = false;
    for (const double h : options.hs) {
      SolverConfig config;
      config.family = options.family;
      config.s = s;
      config.h = h;
      config.t_end = options.probe_t;
      config.y0 = model.y0;
      config.probabilistic = options.probabilistic;
      config.record_stride = 1u << 30;
      const auto results = run_ensemble(model.system, config, options.n, options.seed,
                                        options.threads);
      ConvergenceCell cell;
      cell.s = s;
      cell.h = h;
      for (const auto& r : results) {
        if (r.diverged) {
          ++cell.diverged;
          continue;
        }
        const auto& traj = r.trajectory;
        cell.signed_errors.push_back(traj.state(traj.size() - 1)[options.component] -
                                     report.reference_value);
      }
      const auto m = static_cast<double>(cell.signed_errors.size());
      if (cell.signed_errors.empty()) {
        cell.mean_abs_error = std::numeric_limits<double>::quiet_NaN();
      } else {
        for (const double e : cell.signed_errors) {
          cell.mean_abs_error += std::abs(e);
          cell.mean_signed_error += e;
        }
        cell.mean_abs_error /= m;
        cell.mean_signed_error /= m;
        if (cell.signed_errors.size() > 1) {
          double var = 0.0;
          for (const double e : cell.signed_errors) {
            var += (e - cell.mean_signed_error) * (e - cell.mean_signed_error);
          }
          cell.signed_standard_error = std::sqrt(var / (m - 1.0) / m);
        }
      }
      // Round-off accumulates roughly one unit per step on top of the
      // reference's own discretisation error.
      const double roundoff = std::numeric_limits<double>::epsilon() * (options.probe_t / h) *
                              std::max(1.0, std::abs(report.reference_value));
      cell.floor_limited =
          !(cell.mean_abs_error > options.floor_factor * (report.reference_floor + roundoff));
      any_floor = any_floor || cell.floor_limited;
      if (cell.mean_abs_error > 0.0 && std::isfinite(cell.mean_abs_error)) {
        log_h.push_back(std::log(h));
        log_err.push_back(std::log(cell.mean_abs_error));
      }
      report.cells.push_back(std::move(cell));
    }
    SlopeFit fit;
    fit.s = s;
    fit.floor_limited = any_floor;
    if (log_h.size() >= 2) {
      std::tie(fit.slope, fit.standard_error) = fit_slope(log_h, log_err);
    } else {
      fit.slope = std::numeric_limits<double>::quiet_NaN();
      fit.floor_limited = true;
    }
    report.fits.push_back(fit);
  }
  return report;
}

inline void write_convergence(std::ostream& out, const ConvergenceReport& report) {
  write_csv_row(out, {"s", "h", "n", "diverged", "mean_abs_error", "mean_signed_error",
                      "signed_standard_error", "floor_limited"});
  for (const auto& c : report.cells) {
    write_csv_row(out, {std::to_string(c.s), format_real(c.h),
                        std::to_string(c.signed_errors.size()), std::to_string(c.diverged),
                        format_real(c.mean_abs_error), format_real(c.mean_signed_error),
                        format_real(c.signed_standard_error), c.floor_limited ? "1" : "0"});
  }
}

inline void write_slopes(std::ostream& out, const ConvergenceReport& report) {
  write_csv_row(out, {"s", "slope", "standard_error", "floor_limited"});
  for (const auto& f : report.fits) {
    write_csv_row(out, {std::to_string(f.s), format_real(f.slope), format_real(f.standard_error),
                        f.floor_limited ? "1" : "0"});
  }
}

inline void write_signed_errors(std::ostream& out, const ConvergenceReport& report) {
  write_csv_row(out, {"s", "h", "sample", "signed_error"});
  for (const auto& c : report.cells) {
    for (std::size_t k = 0; k < c.signed_errors.size(); ++k) {
      write_csv_row(out, {std::to_string(c.s), format_real(c.h), std::to_string(k),
                          format_real(c.signed_errors[k])});
    }
  }
}

}  // namespace padams
