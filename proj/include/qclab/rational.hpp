#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace qclab {

/// Exact arbitrary-precision rational. All probabilities in the library use it.
using Rational = mpq_class;

/// Parses "p/q" or "p" (optional leading '-'). Throws QclabError(ParseError).
Rational parse_rational(std::string_view text);

/// Canonical form as printed by GMP: "p/q", or "p" when q == 1.
std::string to_string(const Rational& value);

/// Always "p/q", including q == 1. Used by the distribution file format.
std::string to_fraction_string(const Rational& value);

/// Returns r with r*r == value when value is the square of a rational.
std::optional<Rational> exact_sqrt(const Rational& value);

/// Sign of x - k*sqrt(d) for x >= 0, k >= 0, d >= 0, computed exactly by squaring.
int compare_scaled_sqrt(const Rational& x, const Rational& k, const Rational& d);

Rational pow(const Rational& base, unsigned exponent);

inline Rational clamp_nonnegative(const Rational& value) { return value < 0 ? Rational(0) : value; }

}  // namespace qclab
