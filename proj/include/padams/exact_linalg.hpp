/**
 * @file exact_linalg.hpp
 * @brief Dense linear solves over the rationals.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "padams/rational.hpp"

namespace padams {

using RationalMatrix = std::vector<std::vector<Rational>>;

/// Solves A X = B exactly by Gaussian elimination with partial pivoting
/// (largest magnitude pivot). A is n x n, B is n x m. Returns nullopt when A
/// is singular.
[[nodiscard]] inline std::optional<RationalMatrix> solve_exact(RationalMatrix a, RationalMatrix b) {
  const std::size_t n = a.size();
  if (b.size() != n) {
    throw std::invalid_argument("solve_exact: row count mismatch");
  }
  for (const auto& row : a) {
    if (row.size() != n) {
      throw std::invalid_argument("solve_exact: matrix is not square");
    }
  }
  const std::size_t m = n == 0 ? 0 : b.front().size();

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (abs(a[r][col]) > abs(a[pivot][col])) {
        pivot = r;
      }
    }
    if (a[pivot][col] == 0) {
      return std::nullopt;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col] == 0) {
        continue;
      }
      const Rational factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) {
        a[r][c] -= factor * a[col][c];
      }
      for (std::size_t c = 0; c < m; ++c) {
        b[r][c] -= factor * b[col][c];
      }
    }
  }

  RationalMatrix x(n, std::vector<Rational>(m));
  for (std::size_t ri = n; ri-- > 0;) {
    for (std::size_t c = 0; c < m; ++c) {
      Rational acc = b[ri][c];
      for (std::size_t k = ri + 1; k < n; ++k) {
        acc -= a[ri][k] * x[k][c];
      }
      x[ri][c] = acc / a[ri][ri];
    }
  }
  return x;
}

}  // namespace padams
