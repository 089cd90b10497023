/**
 * @file rational.hpp
 * @brief Exact rational scalar used by every symbolic derivation in padams.
 */
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace padams {

/// Arbitrary-precision integer. Intermediate products in the covariance
/// derivation overflow 64 bits from s = 5 upwards.
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

/// Always-reduced fraction with a positive denominator.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

[[nodiscard]] inline Rational make_rational(long long num, long long den = 1) {
  if (den == 0) {
    throw std::invalid_argument("rational with zero denominator");
  }
  return Rational(num, den);
}

/// "p/q", or "p" when the denominator is one.
[[nodiscard]] inline std::string to_string(const Rational& q) { return q.str(); }

[[nodiscard]] inline double to_double(const Rational& q) { return q.convert_to<double>(); }

[[nodiscard]] inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

/// Exact square root of a nonnegative rational, or nullopt when it is not the
/// square of a rational.
[[nodiscard]] inline std::optional<Rational> exact_sqrt(const Rational& q) {
  if (q < 0) {
    return std::nullopt;
  }
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  const BigInt rn = boost::multiprecision::sqrt(num);
  const BigInt rd = boost::multiprecision::sqrt(den);
  if (rn * rn != num || rd * rd != den) {
    return std::nullopt;
  }
  return Rational(rn, rd);
}

/// Parses "p/q" or "p"; throws std::invalid_argument on malformed input.
[[nodiscard]] inline Rational parse_rational(const std::string& text) {
  try {
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
      return Rational(BigInt(text));
    }
    const BigInt num(text.substr(0, slash));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) {
      throw std::invalid_argument("zero denominator");
    }
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("malformed rational: " + text);
  }
}

}  // namespace padams
