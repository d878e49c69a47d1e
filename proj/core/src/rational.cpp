#include "motcert/rational.hpp"

#include <cctype>

namespace motcert {

namespace {

BigInt parse_bigint(const std::string& text, const std::string& whole) {
  try {
    return BigInt(text);
  } catch (const std::exception&) {
    throw std::invalid_argument("parse_rational: bad literal '" + whole + "'");
  }
}

}  // namespace

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_rational: empty string");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    BigInt num = parse_bigint(text.substr(0, slash), text);
    BigInt den = parse_bigint(text.substr(slash + 1), text);
    if (den == 0) throw std::invalid_argument("parse_rational: zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(parse_bigint(text, text));
  // decimal literal: digits '.' digits
  std::string head = text.substr(0, dot);
  std::string frac = text.substr(dot + 1);
  bool negative = !head.empty() && head[0] == '-';
  if (negative) head = head.substr(1);
  if (head.empty()) head = "0";
  for (char c : head)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("parse_rational: bad literal '" + text + "'");
  for (char c : frac)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("parse_rational: bad literal '" + text + "'");
  BigInt den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  BigInt num = BigInt(head) * den + (frac.empty() ? BigInt(0) : BigInt(frac));
  Rational r(num, den);
  return negative ? Rational(-r) : r;
}

std::string format_rational(const Rational& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

Rational cf_approx(const Rational& x, const Rational& tol) {
  if (tol <= 0) throw std::invalid_argument("cf_approx: tolerance must be positive");
  BigInt a = rational_floor(x);
  Rational rem = x - Rational(a);
  // convergents h/k with the usual recurrence
  BigInt h_prev = 1, h = a;
  BigInt k_prev = 0, k = 1;
  while (true) {
    Rational approx(h, k);
    Rational err = x - approx;
    if (err < 0) err = -err;
    if (err <= tol) return approx;
    if (rem == 0) return x;  // expansion terminated; x itself is the answer
    Rational inv = Rational(1) / rem;
    a = rational_floor(inv);
    rem = inv - Rational(a);
    BigInt h_next = a * h + h_prev;
    BigInt k_next = a * k + k_prev;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
  }
}

}  // namespace motcert
