#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace motcert {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Exact conversion; every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite input");
  return Rational(x);
}

inline double rational_to_double(const Rational& r) { return r.template convert_to<double>(); }

/// Parses "p/q", "p", or a decimal literal such as "0.25".
Rational parse_rational(const std::string& text);

/// Renders as "p/q" ("p" when the denominator is 1).
std::string format_rational(const Rational& r);

inline BigInt floor_div(const BigInt& num, const BigInt& den) {
  BigInt q = num / den;
  if ((num % den) != 0 && ((num < 0) != (den < 0))) --q;
  return q;
}

inline BigInt rational_floor(const Rational& r) { return floor_div(numerator(r), denominator(r)); }

/// First continued-fraction convergent of x within `tol`. The convergent has
/// the smallest denominator among approximations of that accuracy; for
/// rational x the expansion terminates, so the result is never worse than x
/// itself.
Rational cf_approx(const Rational& x, const Rational& tol);

}  // namespace motcert
