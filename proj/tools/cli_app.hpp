// Command-line harness: derivation certificate, coefficient tables,
// ensembles and convergence studies. Kept in a header so tests can drive it
// in-process.
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "padams/coeffs.hpp"
#include "padams/experiments.hpp"
#include "padams/gp_conditioning.hpp"
#include "padams/models.hpp"

namespace padams::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kCheckFailed = 2, kDiverged = 3 };

namespace detail {

inline std::string join(const std::vector<Rational>& values) {
  std::string out;
  for (const auto& v : values) out += (out.empty() ? "" : " ") + to_string(v);
  return out;
}

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

inline void print_certificate(std::ostream& out, const CertificationReport& report) {
  out << "scheme,mean_weights,unaugmented_sd,sd_constant,truncation_constant,status\n";
  for (const auto& row : report.rows) {
    out << row.scheme.label() << ',' << join(row.mean_weights) << ','
        << to_string(row.deterministic_sd) << ',' << to_string(row.sd_constant) << ','
        << to_string(row.expected_sd) << ',' << (row.pass ? "pass" : "FAIL: " + row.failure)
        << '\n';
  }
}

struct EnsembleArgs {
  std::string model;
  std::string family = "ab";
  int steps = 1;
  double h = 0.01;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  double t_end = 1.0;
  std::string probabilistic = "on";
  std::string out;
  std::size_t stride = 1;
  std::size_t threads = 0;
  double divergence_fraction = 0.0;
};

struct ConvergeArgs {
  std::string model;
  std::string family = "ab";
  std::vector<int> steps;
  std::vector<double> hs;
  std::size_t n = 200;
  std::uint64_t seed = 0;
  double probe_t = 10.0;
  std::string probabilistic = "on";
  std::string out;
  std::size_t threads = 0;
};

inline int run_ensemble_command(const EnsembleArgs& args, std::ostream& out) {
  const ModelSpec& model = ModelRegistry::builtin().find(args.model);
  SolverConfig config;
  config.family = *parse_family(args.family);
  config.s = args.steps;
  config.h = args.h;
  config.t_end = args.t_end;
  config.y0 = model.y0;
  config.probabilistic = args.probabilistic == "on";
  config.record_stride = args.stride;

  const auto start = std::chrono::steady_clock::now();
  const auto results = run_ensemble(model.system, config, args.n, args.seed, args.threads);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const EnsembleSummary summary = summarize(results);

  const std::filesystem::path dir(args.out);
  std::filesystem::create_directories(dir);
  auto traj_file = open_output(dir, "trajectories.csv");
  write_trajectories(traj_file, results);
  auto summary_file = open_output(dir, "summary.csv");
  write_summary(summary_file, summary);
  auto replicate_file = open_output(dir, "replicates.csv");
  write_replicates(replicate_file, results);

  std::size_t diverged = 0;
  double wall = 0.0;
  for (const auto& r : results) {
    diverged += r.diverged ? 1 : 0;
    wall += r.wall_seconds;
  }
  out << "model " << model.name << ", scheme " << config.scheme().label() << ", h "
      << format_real(config.h) << ", replicates " << args.n << ", diverged " << diverged << '\n';
  out << "wall-clock " << elapsed << " s total, " << wall / static_cast<double>(args.n)
      << " s per replicate\n";
  if (args.divergence_fraction > 0.0) {
    const Trajectory reference = reference_solve(model, config.h / 50.0, config.t_end, 50);
    const double threshold = args.divergence_fraction * attractor_amplitude(reference, 0);
    const DivergenceTime dt = divergence_time(summary, 0, threshold);
    out << "divergence time " << format_real(dt.time) << (dt.censored ? " (censored)" : "")
        << ", threshold " << format_real(threshold) << '\n';
  }
  return kOk;
}

inline int run_converge_command(const ConvergeArgs& args, std::ostream& out) {
  const ModelSpec& model = ModelRegistry::builtin().find(args.model);
  ConvergenceOptions options;
  options.family = *parse_family(args.family);
  options.steps = args.steps;
  options.hs = args.hs;
  options.n = args.n;
  options.seed = args.seed;
  options.probe_t = args.probe_t;
  options.probabilistic = args.probabilistic == "on";
  options.threads = args.threads;
  const ConvergenceReport report = run_convergence(model, options);

  const std::filesystem::path dir(args.out);
  std::filesystem::create_directories(dir);
  auto cells = open_output(dir, "convergence.csv");
  write_convergence(cells, report);
  auto slopes = open_output(dir, "slopes.csv");
  write_slopes(slopes, report);
  auto errors = open_output(dir, "errors.csv");
  write_signed_errors(errors, report);

  out << "reference: " << report.reference << " (x = " << format_real(report.reference_value)
      << ")\n";
  std::size_t diverged = 0;
  for (const auto& c : report.cells) diverged += c.diverged;
  for (const auto& f : report.fits) {
    out << "s=" << f.s << " slope " << f.slope << " +/- " << f.standard_error
        << (f.floor_limited ? " (floor-limited)" : "") << '\n';
  }
  if (diverged > 0) {
    out << diverged << " replicate(s) diverged\n";
    return kDiverged;
  }
  return kOk;
}

}  // namespace detail

/// Parses argv and runs one subcommand; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Probabilistic Adams-Bashforth / Adams-Moulton integrators"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  const auto families = CLI::IsMember({"ab", "am"});
  const auto on_off = CLI::IsMember({"on", "off"});

  bool check = false;
  int max_steps = 5;
  auto* derive = app.add_subcommand("derive", "Condition the GP prior and certify the laws");
  derive->add_flag("--check", check, "Exit with status 2 unless every row passes");
  derive->add_option("--max-steps", max_steps, "Largest s to certify (1-6)")
      ->check(CLI::Range(1, kMaxSteps));

  std::string coeff_family = "ab";
  int coeff_steps = 1;
  bool with_constant = false;
  auto* coeffs = app.add_subcommand("coeffs", "Print Adams weights as exact fractions");
  coeffs->add_option("--family", coeff_family)->required()->check(families);
  coeffs->add_option("--steps", coeff_steps, "Number of steps (for am: total steps)")
      ->required();
  coeffs->add_flag("--with-constant", with_constant, "Also print the truncation constant");

  std::string basis_family = "ab";
  int basis_steps = 1;
  bool augmented = false;
  auto* basis = app.add_subcommand("basis", "Dump the polynomial basis as exact fractions");
  basis->add_option("--family", basis_family)->required()->check(families);
  basis->add_option("--steps", basis_steps, "Past-window length s")->required();
  basis->add_flag("--augmented", augmented);

  detail::EnsembleArgs ens;
  auto* ensemble = app.add_subcommand("ensemble", "Run seeded replicates of one scheme");
  ensemble->add_option("--model", ens.model)->required();
  ensemble->add_option("--family", ens.family, "ab, or am for predictor-corrector")
      ->check(families);
  ensemble->add_option("--steps", ens.steps)->required();
  ensemble->add_option("--h", ens.h)->required();
  ensemble->add_option("--n", ens.n)->required()->check(CLI::PositiveNumber);
  ensemble->add_option("--seed", ens.seed)->required();
  ensemble->add_option("--t-end", ens.t_end)->required();
  ensemble->add_option("--probabilistic", ens.probabilistic)->check(on_off);
  ensemble->add_option("--out", ens.out)->required();
  ensemble->add_option("--stride", ens.stride, "Write every k-th grid point")
      ->check(CLI::PositiveNumber);
  ensemble->add_option("--threads", ens.threads, "Worker threads (0: one per core)");
  ensemble->add_option("--divergence-threshold", ens.divergence_fraction,
                       "Report when the sd of x first exceeds this fraction of the "
                       "reference amplitude");

  detail::ConvergeArgs conv;
  auto* converge = app.add_subcommand("converge", "Error-versus-step-size study");
  converge->add_option("--model", conv.model)->required();
  converge->add_option("--family", conv.family)->check(families);
  converge->add_option("--steps-list", conv.steps)->required()->delimiter(',');
  converge->add_option("--h-list", conv.hs)->required()->delimiter(',');
  converge->add_option("--n", conv.n)->check(CLI::PositiveNumber);
  converge->add_option("--seed", conv.seed);
  converge->add_option("--probe-t", conv.probe_t);
  converge->add_option("--probabilistic", conv.probabilistic)->check(on_off);
  converge->add_option("--out", conv.out)->required();
  converge->add_option("--threads", conv.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*derive) {
      const auto report = verify_propositions(max_steps);
      detail::print_certificate(out, report);
      return check && !report.all_pass() ? kCheckFailed : kOk;
    }
    if (*coeffs) {
      const Family family = *parse_family(coeff_family);
      const Scheme scheme = family == Family::adams_bashforth
                                ? Scheme{family, coeff_steps}
                                : Scheme{family, coeff_steps - 1};
      const auto weights = family == Family::adams_bashforth ? ab_coefficients(coeff_steps)
                                                             : am_coefficients(coeff_steps);
      out << detail::join(weights) << '\n';
      if (with_constant) out << to_string(truncation_constant(scheme)) << '\n';
      return kOk;
    }
    if (*basis) {
      out << to_string(build_basis(Scheme{*parse_family(basis_family), basis_steps}, augmented));
      return kOk;
    }
    if (*ensemble) return detail::run_ensemble_command(ens, out);
    if (*converge) return detail::run_converge_command(conv, out);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace padams::cli
