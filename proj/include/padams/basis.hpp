/**
 * @file basis.hpp
 * @brief Lagrange basis vectors phi / Phi (Adams-Bashforth) and psi / Psi
 *        (Adams-Moulton), optionally augmented by the error-scale element.
 */
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padams/polynomial.hpp"

namespace padams {

inline constexpr int kMaxSteps = 6;

enum class Family { adams_bashforth, adams_moulton };

/// A method of the Adams family. `s` is the number of past derivative values
/// f_i, ..., f_{i-s+1} in the window; the Moulton variant additionally uses
/// f_{i+1}, so its classical step count is s + 1.
struct Scheme {
  Family family = Family::adams_bashforth;
  int s = 1;

  [[nodiscard]] int total_steps() const noexcept {
    return family == Family::adams_bashforth ? s : s + 1;
  }
  [[nodiscard]] int order() const noexcept { return total_steps(); }

  /// Grid offsets (units of h, relative to t_i) of the interpolated f values,
  /// most recent first.
  [[nodiscard]] std::vector<int> window_nodes() const {
    std::vector<int> nodes;
    if (family == Family::adams_moulton) {
      nodes.push_back(1);
    }
    for (int k = 0; k < s; ++k) {
      nodes.push_back(-k);
    }
    return nodes;
  }

  /// Node added by the augmented element: one past the newest window node.
  [[nodiscard]] int augmented_node() const noexcept {
    return family == Family::adams_bashforth ? 1 : 2;
  }

  /// "AB3", "AM4", ... labelled by classical step count.
  [[nodiscard]] std::string label() const {
    return (family == Family::adams_bashforth ? "AB" : "AM") + std::to_string(total_steps());
  }

  friend bool operator==(const Scheme&, const Scheme&) = default;
};

[[nodiscard]] inline std::string to_string(Family f) {
  return f == Family::adams_bashforth ? "ab" : "am";
}

[[nodiscard]] inline std::optional<Family> parse_family(const std::string& text) {
  if (text == "ab") return Family::adams_bashforth;
  if (text == "am") return Family::adams_moulton;
  return std::nullopt;
}

/// Basis vectors in the normalized variable u = omega / h.
///
/// phi[0] = 0 and Phi[0] = 1 pad the vectors to equal length; Phi[k] is the
/// zero-constant antiderivative of phi[k] for k >= 1. When augmented, the last
/// component carries an implicit factor alpha * h^alpha_exponent which is left
/// symbolic so one BasisSet serves every runtime alpha and h.
struct BasisSet {
  Scheme scheme;
  bool augmented = false;
  std::vector<Polynomial> phi;
  std::vector<Polynomial> Phi;
  int alpha_exponent = 0;

  [[nodiscard]] std::size_t size() const noexcept { return phi.size(); }

  /// Index of the alpha-scaled component, if any.
  [[nodiscard]] std::optional<std::size_t> scaled_component() const noexcept {
    if (!augmented) {
      return std::nullopt;
    }
    return phi.size() - 1;
  }
};

[[nodiscard]] inline BasisSet build_basis(Scheme scheme, bool augmented) {
  if (scheme.s < 1 || scheme.s > kMaxSteps) {
    throw std::invalid_argument("build_basis: step count must lie in [1, " +
                                std::to_string(kMaxSteps) + "], got " +
                                std::to_string(scheme.s));
  }
  BasisSet basis;
  basis.scheme = scheme;
  basis.augmented = augmented;
  basis.alpha_exponent = scheme.order();

  basis.phi.emplace_back();
  basis.Phi.push_back(Polynomial::constant(Rational(1)));

  const std::vector<int> nodes = scheme.window_nodes();
  for (const int node : nodes) {
    Polynomial ell = lagrange_basis(node, nodes);
    basis.Phi.push_back(ell.antiderivative());
    basis.phi.push_back(std::move(ell));
  }

  if (augmented) {
    std::vector<int> extended = nodes;
    extended.insert(extended.begin(), scheme.augmented_node());
    Polynomial extra = lagrange_basis(scheme.augmented_node(), extended);
    basis.Phi.push_back(extra.antiderivative());
    basis.phi.push_back(std::move(extra));
  }
  return basis;
}

[[nodiscard]] inline std::string to_string(const BasisSet& basis) {
  std::string out = basis.scheme.label() + (basis.augmented ? " augmented" : "") + "\n";
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const bool scaled = basis.scaled_component() == k;
    const std::string factor =
        scaled ? "alpha*h^" + std::to_string(basis.alpha_exponent) + " * " : "";
    out += "phi[" + std::to_string(k) + "] = " + factor + basis.phi[k].to_string() + "\n";
    out += "Phi[" + std::to_string(k) + "] = " + factor + basis.Phi[k].to_string() + "\n";
  }
  return out;
}

}  // namespace padams
