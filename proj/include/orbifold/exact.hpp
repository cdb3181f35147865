#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace orbifold {

using Integer = mpz_class;
using Rational = mpq_class;

/// Parses "p/q", "p" or "-p/q" into a canonical rational. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" (or "p" when the denominator is 1).
std::string to_string(const Rational& r);
std::string to_string(const Integer& z);

/// Representative of r in [0, 1).
Rational frac(const Rational& r);

Integer gcd(const Integer& a, const Integer& b);
Integer lcm(const Integer& a, const Integer& b);
long lcm(long a, long b);

bool is_integer(const Rational& r);

std::vector<Rational> parse_rational_list(std::string_view text, char sep = ',');
std::vector<long> parse_int_list(std::string_view text, char sep = ',');

}  // namespace orbifold
