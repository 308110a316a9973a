#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace operforge {

// Ground field. mpq_class keeps values canonical: lowest terms, positive denominator.
using Rational = mpq_class;

// Formats as "p/q", or "p" when q = 1.
std::string format_rational(const Rational& q);

// Accepts "[+-]digits" or "[+-]digits/digits"; rejects zero denominators and anything else.
std::optional<Rational> parse_rational(std::string_view text);

// Exact rational n-th root, if one exists.
std::optional<Rational> rational_root(const Rational& q, unsigned n);

} // namespace operforge
