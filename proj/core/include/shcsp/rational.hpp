#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace shcsp {

/// Exact rational used for literals, probabilities and interrupt weights.
using Rational = boost::multiprecision::cpp_rational;

/// Parses a decimal literal ("0.25", "1e-3", "-2") or a quotient ("1/5000").
/// Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// Exact rational for the shortest decimal that round-trips `value`.
Rational rational_from_double(double value);

/// The exact binary value of `value`.
Rational exact_rational(double value);

/// Terminating decimal when the denominator is of the form 2^a 5^b,
/// otherwise "n/d".
std::string to_decimal_string(const Rational& r);

bool is_terminating_decimal(const Rational& r);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace shcsp
