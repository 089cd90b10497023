/**
 * @file polynomial.hpp
 * @brief Exact univariate polynomials with rational coefficients and the
 *        Lagrange basis on integer grid offsets.
 *
 * The variable is the dimensionless step coordinate u = omega / h, so grid
 * point t_{i+k} sits at u = k. Powers of h are tracked by the callers.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "padams/rational.hpp"

namespace padams {

class Polynomial {
 public:
  Polynomial() = default;

  /// coeffs[k] multiplies u^k. Trailing zeros are trimmed.
  explicit Polynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  Polynomial(std::initializer_list<Rational> coeffs) : coeffs_(coeffs) { trim(); }

  [[nodiscard]] static Polynomial constant(const Rational& c) { return Polynomial({c}); }

  /// The monic linear factor (u - root).
  [[nodiscard]] static Polynomial linear_factor(const Rational& root) {
    return Polynomial({Rational(-root), Rational(1)});
  }

  [[nodiscard]] static Polynomial monomial(std::size_t k, const Rational& c = Rational(1)) {
    std::vector<Rational> coeffs(k + 1);
    coeffs[k] = c;
    return Polynomial(std::move(coeffs));
  }

  [[nodiscard]] const std::vector<Rational>& coefficients() const noexcept { return coeffs_; }

  [[nodiscard]] bool is_zero() const noexcept { return coeffs_.empty(); }

  /// -1 for the zero polynomial.
  [[nodiscard]] int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }

  [[nodiscard]] Rational coefficient(std::size_t k) const {
    return k < coeffs_.size() ? coeffs_[k] : Rational(0);
  }

  [[nodiscard]] Rational operator()(const Rational& u) const {
    Rational acc(0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = acc * u + *it;
    }
    return acc;
  }

  [[nodiscard]] double evaluate(double u) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = acc * u + to_double(*it);
    }
    return acc;
  }

  /// Antiderivative with zero constant term.
  [[nodiscard]] Polynomial antiderivative() const {
    std::vector<Rational> out(coeffs_.size() + 1);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      out[k + 1] = coeffs_[k] / Rational(static_cast<long long>(k + 1));
    }
    return Polynomial(std::move(out));
  }

  [[nodiscard]] Polynomial derivative() const {
    if (coeffs_.size() <= 1) {
      return {};
    }
    std::vector<Rational> out(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
      out[k - 1] = coeffs_[k] * Rational(static_cast<long long>(k));
    }
    return Polynomial(std::move(out));
  }

  Polynomial& operator+=(const Polynomial& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) {
      coeffs_.resize(rhs.coeffs_.size());
    }
    for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) {
      coeffs_[k] += rhs.coeffs_[k];
    }
    trim();
    return *this;
  }

  Polynomial& operator-=(const Polynomial& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) {
      coeffs_.resize(rhs.coeffs_.size());
    }
    for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) {
      coeffs_[k] -= rhs.coeffs_[k];
    }
    trim();
    return *this;
  }

  Polynomial& operator*=(const Rational& c) {
    for (auto& a : coeffs_) {
      a *= c;
    }
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) {
      return {};
    }
    std::vector<Rational> out(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
        out[i + j] += a.coeffs_[i] * b.coeffs_[j];
      }
    }
    return Polynomial(std::move(out));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  /// Human-readable form in the variable `var`, e.g. "1 + 3/2*u + 1/2*u^2".
  [[nodiscard]] std::string to_string(const std::string& var = "u") const {
    if (coeffs_.empty()) {
      return "0";
    }
    std::string out;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      if (coeffs_[k] == 0) {
        continue;
      }
      if (!out.empty()) {
        out += " + ";
      }
      out += padams::to_string(coeffs_[k]);
      if (k >= 1) {
        out += "*" + var;
      }
      if (k >= 2) {
        out += "^" + std::to_string(k);
      }
    }
    return out;
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) {
      coeffs_.pop_back();
    }
  }

  std::vector<Rational> coeffs_;
};

/// Exact integral of p over u in [0, 1].
[[nodiscard]] inline Rational integrate_01(const Polynomial& p) {
  Rational acc(0);
  const auto& c = p.coefficients();
  for (std::size_t k = 0; k < c.size(); ++k) {
    acc += c[k] / Rational(static_cast<long long>(k + 1));
  }
  return acc;
}

/// The Lagrange polynomial equal to one at u = node and zero at every other
/// entry of `nodes`. Nodes are integer grid offsets relative to t_i.
[[nodiscard]] inline Polynomial lagrange_basis(int node, std::span<const int> nodes) {
  if (nodes.empty()) {
    throw std::invalid_argument("lagrange_basis: empty node set");
  }
  std::vector<int> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("lagrange_basis: duplicate nodes");
  }
  if (!std::binary_search(sorted.begin(), sorted.end(), node)) {
    throw std::invalid_argument("lagrange_basis: node " + std::to_string(node) +
                                " is not in the node set");
  }
  Polynomial out = Polynomial::constant(Rational(1));
  for (const int other : nodes) {
    if (other == node) {
      continue;
    }
    out = out * Polynomial::linear_factor(Rational(other));
    out *= Rational(1) / Rational(node - other);
  }
  return out;
}

[[nodiscard]] inline Polynomial lagrange_basis(int node, std::initializer_list<int> nodes) {
  return lagrange_basis(node, std::span<const int>(nodes.begin(), nodes.size()));
}

}  // namespace padams
