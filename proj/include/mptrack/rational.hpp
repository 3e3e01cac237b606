#pragma once

#include <cctype>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

#include "mptrack/precision.hpp"
#include "mptrack/real.hpp"

namespace mptrack {

/// Parse an integer, ratio `p/q`, or (scientific) decimal literal into an exact
/// rational. Decimal literals are exact: 0.125 -> 1/8, 2e-9 -> 1/500000000.
inline mpq_class rational_from_literal(const std::string& text) {
  std::string s;
  s.reserve(text.size());
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw std::invalid_argument("empty numeric literal");

  auto slash = s.find('/');
  if (slash != std::string::npos) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("invalid ratio: " + text);
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
    q.canonicalize();
    return q;
  }

  bool neg = false;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');

  std::string digits;
  long frac_digits = 0;
  bool seen_point = false, seen_digit = false;
  for (; i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'); ++i) {
    if (s[i] == '.') {
      if (seen_point) throw std::invalid_argument("invalid decimal: " + text);
      seen_point = true;
    } else {
      digits.push_back(s[i]);
      seen_digit = true;
      if (seen_point) ++frac_digits;
    }
  }
  if (!seen_digit) throw std::invalid_argument("invalid numeric literal: " + text);

  long exp10 = 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    exp10 = std::stol(s.substr(i + 1));
    i = s.size();
  }
  if (i != s.size()) throw std::invalid_argument("invalid numeric literal: " + text);

  mpz_class num(digits.empty() ? std::string("0") : digits, 10);
  if (neg) num = -num;
  long net = exp10 - frac_digits;
  mpq_class q(num);
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(net < 0 ? -net : net));
  if (net > 0) {
    q *= mpq_class(pow10);
  } else if (net < 0) {
    q /= mpq_class(pow10);
  }
  q.canonicalize();
  return q;
}

/// Exact `p/q` form (integers drop the denominator); parses back verbatim.
inline std::string rational_to_string(const mpq_class& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Exact complex number with rational parts; the carrier for system
/// coefficients, which are re-rounded at whatever precision evaluation uses.
struct ComplexRational {
  mpq_class re{0};
  mpq_class im{0};

  ComplexRational() = default;
  ComplexRational(mpq_class r, mpq_class i = mpq_class(0)) : re(std::move(r)), im(std::move(i)) {}
  ComplexRational(long r, long i) : re(r), im(i) {}

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  friend ComplexRational operator+(const ComplexRational& a, const ComplexRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend ComplexRational operator-(const ComplexRational& a, const ComplexRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend ComplexRational operator-(const ComplexRational& a) { return {-a.re, -a.im}; }
  friend ComplexRational operator*(const ComplexRational& a, const ComplexRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend ComplexRational operator/(const ComplexRational& a, const ComplexRational& b) {
    mpq_class d = b.re * b.re + b.im * b.im;
    if (d == 0) throw std::domain_error("division by zero constant");
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re == b.re && a.im == b.im;
  }

  /// |re| + |im| = 0 iff zero; exact modulus is irrational in general, so
  /// bound work uses a double approximation instead.
  double abs_approx() const {
    double r = re.get_d(), i = im.get_d();
    return std::sqrt(r * r + i * i);
  }

  std::string to_string() const {
    std::string s = rational_to_string(re);
    if (im != 0) s += " + (" + rational_to_string(im) + ")*I";
    return s;
  }
};

}  // namespace mptrack
