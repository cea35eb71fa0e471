#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace leadmetric {

/// Exact rational number; always kept in canonical (reduced, positive
/// denominator) form.
using Rational = mpq_class;

/// Parses "p/q" (or a bare integer "p" when `allow_integer`). The text must
/// already be reduced with q > 0, otherwise ParseError.
Rational parse_rational(std::string_view text, bool allow_integer = false);

/// Canonical "p/q" rendering; integers render as "p/1".
std::string to_string(const Rational& value);

/// Decimal rendering for lossy outputs (CSV). 17 significant digits.
std::string to_decimal(const Rational& value);

/// num / den in canonical form. Constructing mpq_class from a pair does not
/// reduce, and comparisons assume reduced operands.
inline Rational ratio(const mpz_class& num, const mpz_class& den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

/// 2^{-k}.
Rational pow2_inverse(unsigned long k);

inline Rational abs(const Rational& value) { return value < 0 ? Rational(-value) : value; }

inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }

}  // namespace leadmetric
