#include "shcsp/rational.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace shcsp {

namespace {

using boost::multiprecision::cpp_int;

cpp_int pow10(unsigned n) {
  cpp_int r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

Rational parse_decimal(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty numeric literal");
  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  cpp_int mantissa = 0;
  long scale = 0;
  bool digits = false;
  for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
    mantissa = mantissa * 10 + (s[i] - '0');
    digits = true;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
      mantissa = mantissa * 10 + (s[i] - '0');
      --scale;
      digits = true;
    }
  }
  if (!digits) throw std::invalid_argument("malformed numeric literal '" + std::string(s) + "'");
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    long exponent = 0;
    bool exp_negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      exp_negative = s[i] == '-';
      ++i;
    }
    bool exp_digits = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
      exponent = exponent * 10 + (s[i] - '0');
      if (exponent > 4000) throw std::invalid_argument("exponent out of range");
      exp_digits = true;
    }
    if (!exp_digits) throw std::invalid_argument("malformed exponent in '" + std::string(s) + "'");
    scale += exp_negative ? -exponent : exponent;
  }
  if (i != s.size()) throw std::invalid_argument("malformed numeric literal '" + std::string(s) + "'");
  Rational r = scale >= 0 ? Rational(mantissa * pow10(static_cast<unsigned>(scale)))
                          : Rational(mantissa, pow10(static_cast<unsigned>(-scale)));
  return negative ? Rational(-r) : r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  Rational num = parse_decimal(text.substr(0, slash));
  Rational den = parse_decimal(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value has no rational form");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  if (res.ec != std::errc()) throw std::invalid_argument("cannot format double");
  return parse_decimal(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

Rational exact_rational(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value has no rational form");
  int exp = 0;
  const double frac = std::frexp(value, &exp);
  const auto mantissa = static_cast<long long>(std::ldexp(frac, 53));
  Rational r(mantissa);
  const int shift = exp - 53;
  cpp_int scale = cpp_int(1) << (shift < 0 ? -shift : shift);
  return shift < 0 ? Rational(r / scale) : Rational(r * scale);
}

bool is_terminating_decimal(const Rational& r) {
  cpp_int d = boost::multiprecision::denominator(r);
  while (d % 2 == 0) d /= 2;
  while (d % 5 == 0) d /= 5;
  return d == 1;
}

std::string to_decimal_string(const Rational& r) {
  cpp_int num = boost::multiprecision::numerator(r);
  cpp_int den = boost::multiprecision::denominator(r);
  if (!is_terminating_decimal(r)) return num.str() + "/" + den.str();
  bool negative = num < 0;
  if (negative) num = -num;
  unsigned places = 0;
  while (pow10(places) % den != 0) ++places;
  cpp_int scaled = num * (pow10(places) / den);
  std::string digits = scaled.str();
  if (places > 0) {
    if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
    digits.insert(digits.size() - places, ".");
  }
  return negative ? "-" + digits : digits;
}

}  // namespace shcsp
