/**
 * @file coeffs.hpp
 * @brief Classical Adams coefficient tables, truncation constants and
 *        backward-difference stencils.
 *
 * Everything here is computed by direct Lagrange integration, exactness
 * defects and moment systems. None of it goes through the Gaussian-process
 * conditioning in gp_conditioning.hpp, so the two derivations check each
 * other.
 */
#pragma once

#include <string>
#include <vector>

#include "padams/basis.hpp"
#include "padams/exact_linalg.hpp"
#include "padams/polynomial.hpp"

namespace padams {

namespace detail {

inline void require_range(const char* what, int value, int lo, int hi) {
  if (value < lo || value > hi) {
    throw std::invalid_argument(std::string(what) + ": argument " + std::to_string(value) +
                                " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                "]");
  }
}

inline std::vector<Rational> integrated_lagrange_weights(const std::vector<int>& nodes) {
  std::vector<Rational> out;
  out.reserve(nodes.size());
  for (const int node : nodes) {
    out.push_back(integrate_01(lagrange_basis(node, nodes)));
  }
  return out;
}

inline Rational factorial(int n) {
  Rational out(1);
  for (int k = 2; k <= n; ++k) {
    out *= Rational(k);
  }
  return out;
}

inline Rational power(const Rational& base, int exponent) {
  Rational out(1);
  for (int k = 0; k < exponent; ++k) {
    out *= base;
  }
  return out;
}

}  // namespace detail

/// beta_{j,s} for j = 0..s-1, weights on f_i, ..., f_{i-s+1}.
[[nodiscard]] inline std::vector<Rational> ab_coefficients(int s) {
  detail::require_range("ab_coefficients", s, 1, kMaxSteps);
  return detail::integrated_lagrange_weights(Scheme{Family::adams_bashforth, s}.window_nodes());
}

/// Moulton weights for a method with `total_steps` derivative values; the
/// first entry multiplies f_{i+1}.
[[nodiscard]] inline std::vector<Rational> am_coefficients(int total_steps) {
  detail::require_range("am_coefficients", total_steps, 1, kMaxSteps + 1);
  return detail::integrated_lagrange_weights(
      Scheme{Family::adams_moulton, total_steps - 1}.window_nodes());
}

[[nodiscard]] inline std::vector<Rational> scheme_coefficients(Scheme scheme) {
  return scheme.family == Family::adams_bashforth ? ab_coefficients(scheme.s)
                                                  : am_coefficients(scheme.total_steps());
}

/// Signed one-step defect of the rule on y = u^{p+1}, f = (p+1) u^p over
/// [0, 1], divided by (p+1)!: the leading local truncation error is
/// defect * h^{p+1} * y^{(p+1)}.
[[nodiscard]] inline Rational lte_defect(Scheme scheme, const std::vector<Rational>& betas) {
  const int p = scheme.order();
  const std::vector<int> nodes = scheme.window_nodes();
  Rational rule(0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    rule += betas[k] * Rational(p + 1) * detail::power(Rational(nodes[k]), p);
  }
  return (Rational(1) - rule) / detail::factorial(p + 1);
}

/// Magnitude of the leading local truncation error constant. For the
/// Bashforth family this is the leading Moulton weight with one more step.
[[nodiscard]] inline Rational truncation_constant(Scheme scheme) {
  if (scheme.family == Family::adams_bashforth) {
    detail::require_range("truncation_constant", scheme.s, 1, kMaxSteps);
    return am_coefficients(scheme.s + 1).front();
  }
  detail::require_range("truncation_constant", scheme.total_steps(), 1, kMaxSteps + 1);
  return abs(lte_defect(scheme, am_coefficients(scheme.total_steps())));
}

/// delta_{k,s}, k = 0..s, with h^{-s} sum_k delta_k f_{i-k} = f^{(s)} + O(h).
/// Solved from the Taylor moment system about t_{i+1} on offsets 0..-s.
[[nodiscard]] inline std::vector<Rational> bd_coefficients(int s) {
  detail::require_range("bd_coefficients", s, 1, kMaxSteps + 1);
  const int n = s + 1;
  RationalMatrix moments(n, std::vector<Rational>(n));
  RationalMatrix rhs(n, std::vector<Rational>(1));
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < n; ++k) {
      moments[m][k] = detail::power(Rational(-k - 1), m) / detail::factorial(m);
    }
    rhs[m][0] = m == s ? Rational(1) : Rational(0);
  }
  const auto solved = solve_exact(std::move(moments), std::move(rhs));
  if (!solved) {
    throw std::logic_error("bd_coefficients: singular moment system");
  }
  std::vector<Rational> out;
  out.reserve(n);
  for (const auto& row : *solved) {
    out.push_back(row[0]);
  }
  return out;
}

struct SchemeTable {
  Scheme scheme;
  std::vector<Rational> betas;
  Rational lte_constant;
  std::vector<Rational> bd_coeffs;
};

[[nodiscard]] inline SchemeTable scheme_table(Scheme scheme) {
  SchemeTable table;
  table.scheme = scheme;
  table.betas = scheme_coefficients(scheme);
  table.lte_constant = truncation_constant(scheme);
  table.bd_coeffs = bd_coefficients(scheme.order());
  return table;
}

struct NextOrderIdentity {
  int s = 0;
  std::vector<Rational> corrected;  ///< beta_s (zero padded) + C_s * delta_s
  std::vector<Rational> expected;   ///< beta_{s+1}
  bool pass = false;
};

/// Adding the backward-difference error estimate to the s-step Bashforth rule
/// reproduces the (s+1)-step rule exactly.
[[nodiscard]] inline NextOrderIdentity ab_next_order_identity(int s) {
  detail::require_range("ab_next_order_identity", s, 1, kMaxSteps - 1);
  NextOrderIdentity report;
  report.s = s;
  report.corrected = ab_coefficients(s);
  report.corrected.emplace_back(0);
  const Rational c = truncation_constant(Scheme{Family::adams_bashforth, s});
  const std::vector<Rational> delta = bd_coefficients(s);
  for (std::size_t k = 0; k < delta.size(); ++k) {
    report.corrected[k] += c * delta[k];
  }
  report.expected = ab_coefficients(s + 1);
  report.pass = report.corrected == report.expected;
  return report;
}

}  // namespace padams
