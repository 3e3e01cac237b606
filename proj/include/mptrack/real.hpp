#pragma once

#include <cstdio>
#include <string>
#include <utility>

#include <gmp.h>
#include <mpfr.h>

#include "mptrack/precision.hpp"

namespace mptrack {

/// Arbitrary-precision real number. Immutable value semantics: every operation
/// returns a fresh value; the precision level travels with the value.
class MpReal {
 public:
  explicit MpReal(PrecisionLevel level = PrecisionLevel()) {
    mpfr_init2(x_, level.mpfr_prec());
    mpfr_set_zero(x_, 1);
  }

  MpReal(double v, PrecisionLevel level) {
    mpfr_init2(x_, level.mpfr_prec());
    mpfr_set_d(x_, v, MPFR_RNDN);
  }

  /// Rational rounded to nearest at `level`. `exact` (if given) reports whether
  /// the value is representable without rounding.
  MpReal(const mpq_t q, PrecisionLevel level, bool* exact = nullptr) {
    mpfr_init2(x_, level.mpfr_prec());
    int t = mpfr_set_q(x_, q, MPFR_RNDN);
    if (exact != nullptr) *exact = (t == 0);
  }

  /// Decimal string rounded to nearest at `level`.
  static MpReal from_string(const std::string& s, PrecisionLevel level) {
    MpReal r(level);
    if (mpfr_set_str(r.x_, s.c_str(), 10, MPFR_RNDN) != 0) {
      throw std::invalid_argument("invalid decimal literal: " + s);
    }
    return r;
  }

  MpReal(const MpReal& o) {
    mpfr_init2(x_, mpfr_get_prec(o.x_));
    mpfr_set(x_, o.x_, MPFR_RNDN);
  }

  MpReal(MpReal&& o) noexcept {
    mpfr_init2(x_, MPFR_PREC_MIN);
    mpfr_swap(x_, o.x_);
  }

  MpReal& operator=(const MpReal& o) {
    if (this != &o) {
      mpfr_set_prec(x_, mpfr_get_prec(o.x_));
      mpfr_set(x_, o.x_, MPFR_RNDN);
    }
    return *this;
  }

  MpReal& operator=(MpReal&& o) noexcept {
    mpfr_swap(x_, o.x_);
    return *this;
  }

  ~MpReal() { mpfr_clear(x_); }

  PrecisionLevel level() const { return PrecisionLevel::from_mpfr_prec(mpfr_get_prec(x_)); }

  /// Correctly rounded copy at `level`; raising precision preserves the value.
  MpReal with_precision(PrecisionLevel level) const {
    MpReal r(level);
    mpfr_set(r.x_, x_, MPFR_RNDN);
    return r;
  }

  double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }

  bool is_zero() const { return mpfr_zero_p(x_) != 0; }
  int sign() const { return mpfr_sgn(x_); }

  friend MpReal operator+(const MpReal& a, const MpReal& b) { return binary(mpfr_add, a, b); }
  friend MpReal operator-(const MpReal& a, const MpReal& b) { return binary(mpfr_sub, a, b); }
  friend MpReal operator*(const MpReal& a, const MpReal& b) { return binary(mpfr_mul, a, b); }
  friend MpReal operator/(const MpReal& a, const MpReal& b) { return binary(mpfr_div, a, b); }

  friend MpReal operator-(const MpReal& a) {
    MpReal r(a.level());
    mpfr_neg(r.x_, a.x_, MPFR_RNDN);
    return r;
  }

  friend MpReal abs(const MpReal& a) {
    MpReal r(a.level());
    mpfr_abs(r.x_, a.x_, MPFR_RNDN);
    return r;
  }

  friend MpReal sqrt(const MpReal& a) {
    MpReal r(a.level());
    mpfr_sqrt(r.x_, a.x_, MPFR_RNDN);
    return r;
  }

  /// sqrt(a^2 + b^2), correctly rounded at the shared level.
  friend MpReal hypot(const MpReal& a, const MpReal& b) {
    MpReal r(result_level(a, b));
    mpfr_hypot(r.x_, a.x_, b.x_, MPFR_RNDN);
    return r;
  }

  friend bool operator==(const MpReal& a, const MpReal& b) { return mpfr_equal_p(a.x_, b.x_) != 0; }
  friend bool operator<(const MpReal& a, const MpReal& b) { return mpfr_less_p(a.x_, b.x_) != 0; }
  friend bool operator<=(const MpReal& a, const MpReal& b) { return mpfr_lessequal_p(a.x_, b.x_) != 0; }
  friend bool operator>(const MpReal& a, const MpReal& b) { return mpfr_greater_p(a.x_, b.x_) != 0; }
  friend bool operator>=(const MpReal& a, const MpReal& b) { return mpfr_greaterequal_p(a.x_, b.x_) != 0; }

  /// Scientific-notation decimal string with enough digits to round-trip the level.
  std::string to_string() const {
    int digits = level().roundtrip_digits();
    char buf[96];
    int n = mpfr_snprintf(buf, sizeof buf, "%.*Re", digits - 1, x_);
    if (n > 0 && n < static_cast<int>(sizeof buf)) return std::string(buf, n);
    // Fallback for precisions too wide for the stack buffer.
    char* heap = nullptr;
    mpfr_asprintf(&heap, "%.*Re", digits - 1, x_);
    std::string out(heap);
    mpfr_free_str(heap);
    return out;
  }

  const mpfr_t& raw() const { return x_; }
  mpfr_t& raw() { return x_; }

 private:
  static PrecisionLevel result_level(const MpReal& a, const MpReal& b) {
    // Mixed-level operands round into the wider level.
    return std::max(a.level(), b.level());
  }

  template <typename F>
  static MpReal binary(F op, const MpReal& a, const MpReal& b) {
    MpReal r(result_level(a, b));
    op(r.x_, a.x_, b.x_, MPFR_RNDN);
    return r;
  }

  mpfr_t x_;
};

}  // namespace mptrack
