/**
 * @file gp_conditioning.hpp
 * @brief Joint Gaussian-process prior over (y_{i+1}, y_i, f-window) built from
 *        a BasisSet, and its exact Gaussian conditioning.
 *
 * Entries are polynomials in the symbolic noise scale a = alpha * h^p (p the
 * method order), with exact rational coefficients. The derivation runs in
 * the normalized variable u = omega / h: the y-rows carry one implicit power
 * of h, so conditional f-weights and the standard deviation are restored by
 * one factor of h at runtime.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "padams/basis.hpp"
#include "padams/coeffs.hpp"
#include "padams/exact_linalg.hpp"
#include "padams/polynomial.hpp"

namespace padams {

/// The basis construction produced a prior that cannot be conditioned as
/// expected. Indicates a broken basis, not a user error.
class DerivationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Polynomials in the noise scale a; entry(r, c) = v_r^T v_c.
struct PriorMatrix {
  Scheme scheme;
  bool augmented = false;
  std::vector<std::string> labels;  ///< y_{i+1}, y_i, [f_{i+1}], f_i, ..., f_{i-s+1}
  std::vector<std::vector<Polynomial>> entries;

  [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }

  /// Numeric covariance for a concrete value of the noise scale.
  [[nodiscard]] std::vector<std::vector<double>> evaluate(double noise_scale) const {
    std::vector<std::vector<double>> out(size(), std::vector<double>(size()));
    for (std::size_t r = 0; r < size(); ++r) {
      for (std::size_t c = 0; c < size(); ++c) {
        out[r][c] = entries[r][c].evaluate(noise_scale);
      }
    }
    return out;
  }
};

namespace detail {

inline std::string offset_label(const char* var, int offset) {
  if (offset == 0) return std::string(var) + "_i";
  return std::string(var) + "_{i" + (offset > 0 ? "+" : "") + std::to_string(offset) + "}";
}

/// Components of `vec` at u = offset, as polynomials in the noise scale.
inline std::vector<Polynomial> evaluate_components(const BasisSet& basis,
                                                   const std::vector<Polynomial>& vec,
                                                   int offset) {
  std::vector<Polynomial> out;
  out.reserve(vec.size());
  for (std::size_t k = 0; k < vec.size(); ++k) {
    const Rational value = vec[k](Rational(offset));
    if (basis.scaled_component() == k) {
      out.push_back(Polynomial::monomial(1, value));
    } else {
      out.push_back(Polynomial::constant(value));
    }
  }
  return out;
}

inline Polynomial inner(const std::vector<Polynomial>& a, const std::vector<Polynomial>& b) {
  Polynomial acc;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += a[k] * b[k];
  }
  return acc;
}

}  // namespace detail

[[nodiscard]] inline PriorMatrix build_prior(const BasisSet& basis) {
  PriorMatrix prior;
  prior.scheme = basis.scheme;
  prior.augmented = basis.augmented;

  std::vector<std::vector<Polynomial>> rows;
  rows.push_back(detail::evaluate_components(basis, basis.Phi, 1));
  prior.labels.push_back(detail::offset_label("y", 1));
  rows.push_back(detail::evaluate_components(basis, basis.Phi, 0));
  prior.labels.push_back(detail::offset_label("y", 0));
  for (const int node : basis.scheme.window_nodes()) {
    rows.push_back(detail::evaluate_components(basis, basis.phi, node));
    prior.labels.push_back(detail::offset_label("f", node));
  }

  prior.entries.assign(rows.size(), std::vector<Polynomial>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = r; c < rows.size(); ++c) {
      prior.entries[r][c] = detail::inner(rows[r], rows[c]);
      prior.entries[c][r] = prior.entries[r][c];
    }
  }
  return prior;
}

/// Law of y_{i+1} given y_i and the f-window:
///   mean = y_weight * y_i + h * sum_j f_weights[j] * f_j
///   sd   = |alpha| * h^(order + 1) * sd_constant
struct ConditionalLaw {
  Scheme scheme;
  bool augmented = false;
  Rational y_weight;
  std::vector<Rational> f_weights;  ///< prior f-row order: [f_{i+1}], f_i, ...
  Rational sd_constant;

  [[nodiscard]] int h_power() const noexcept { return scheme.order() + 1; }
};

[[nodiscard]] inline ConditionalLaw condition(const PriorMatrix& prior) {
  const std::size_t n = prior.size() - 1;
  for (std::size_t r = 1; r <= n; ++r) {
    for (std::size_t c = 1; c <= n; ++c) {
      if (prior.entries[r][c].degree() > 0) {
        throw DerivationError("condition: conditioning block of " + prior.scheme.label() +
                              " depends on the noise scale");
      }
    }
  }

  int cross_degree = 0;
  for (std::size_t c = 1; c <= n; ++c) {
    cross_degree = std::max(cross_degree, prior.entries[0][c].degree());
  }
  const auto powers = static_cast<std::size_t>(cross_degree + 1);

  RationalMatrix sigma22(n, std::vector<Rational>(n));
  RationalMatrix sigma21(n, std::vector<Rational>(powers));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      sigma22[r][c] = prior.entries[r + 1][c + 1].coefficient(0);
    }
    for (std::size_t p = 0; p < powers; ++p) {
      sigma21[r][p] = prior.entries[r + 1][0].coefficient(p);
    }
  }

  const auto solved = solve_exact(std::move(sigma22), std::move(sigma21));
  if (!solved) {
    throw DerivationError("condition: singular conditioning block for " + prior.scheme.label());
  }

  std::vector<Polynomial> weights;
  weights.reserve(n);
  for (const auto& row : *solved) {
    weights.emplace_back(row);
  }

  Polynomial variance = prior.entries[0][0];
  for (std::size_t j = 0; j < n; ++j) {
    variance -= prior.entries[0][j + 1] * weights[j];
  }

  ConditionalLaw law;
  law.scheme = prior.scheme;
  law.augmented = prior.augmented;
  for (std::size_t j = 0; j < n; ++j) {
    if (weights[j].degree() > 0) {
      throw DerivationError("condition: conditional mean of " + prior.scheme.label() +
                            " depends on the noise scale");
    }
    const Rational w = weights[j].coefficient(0);
    if (j == 0) {
      law.y_weight = w;
    } else {
      law.f_weights.push_back(w);
    }
  }

  if (variance.degree() > 2 || variance.coefficient(0) != 0 || variance.coefficient(1) != 0) {
    throw DerivationError("condition: conditional variance of " + prior.scheme.label() +
                          " is not a pure square of the noise scale: " +
                          variance.to_string("a"));
  }
  const auto sd = exact_sqrt(variance.coefficient(2));
  if (!sd) {
    throw DerivationError("condition: variance coefficient " +
                          to_string(variance.coefficient(2)) + " is not a rational square");
  }
  law.sd_constant = *sd;
  return law;
}

[[nodiscard]] inline ConditionalLaw derive_law(Scheme scheme, bool augmented) {
  return condition(build_prior(build_basis(scheme, augmented)));
}

struct CertificationRow {
  Scheme scheme;
  std::vector<Rational> mean_weights;      ///< augmented law
  Rational deterministic_sd;               ///< unaugmented law
  Rational sd_constant;                    ///< augmented law
  std::vector<Rational> expected_weights;  ///< classical table
  Rational expected_sd;                    ///< truncation constant
  bool pass = false;
  std::string failure;
};

struct CertificationReport {
  std::vector<CertificationRow> rows;

  [[nodiscard]] bool all_pass() const {
    for (const auto& row : rows) {
      if (!row.pass) return false;
    }
    return !rows.empty();
  }
};

/// Checks, for every family and s in [1, s_max], that the conditioned mean is
/// the classical rule, the unaugmented variance vanishes, augmentation leaves
/// the mean alone, and the augmented sd constant is the truncation constant.
[[nodiscard]] inline CertificationReport verify_propositions(int s_max) {
  detail::require_range("verify_propositions", s_max, 1, kMaxSteps);
  CertificationReport report;
  for (const Family family : {Family::adams_bashforth, Family::adams_moulton}) {
    for (int s = 1; s <= s_max; ++s) {
      CertificationRow row;
      row.scheme = Scheme{family, s};
      row.expected_weights = scheme_coefficients(row.scheme);
      row.expected_sd = truncation_constant(row.scheme);
      try {
        const ConditionalLaw plain = derive_law(row.scheme, false);
        const ConditionalLaw noisy = derive_law(row.scheme, true);
        row.mean_weights = noisy.f_weights;
        row.deterministic_sd = plain.sd_constant;
        row.sd_constant = noisy.sd_constant;
        if (plain.y_weight != 1 || noisy.y_weight != 1) {
          row.failure = "weight on y_i is not 1";
        } else if (plain.f_weights != row.expected_weights) {
          row.failure = "conditional mean differs from the classical rule";
        } else if (noisy.f_weights != plain.f_weights) {
          row.failure = "augmentation changed the conditional mean";
        } else if (plain.sd_constant != 0) {
          row.failure = "unaugmented variance is nonzero";
        } else if (noisy.sd_constant != row.expected_sd) {
          row.failure = "sd constant differs from the truncation constant";
        }
      } catch (const DerivationError& e) {
        row.failure = e.what();
      }
      row.pass = row.failure.empty();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace padams
