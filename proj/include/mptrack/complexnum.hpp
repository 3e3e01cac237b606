#pragma once

#include <stdexcept>
#include <string>

#include "mptrack/precision.hpp"
#include "mptrack/rational.hpp"
#include "mptrack/real.hpp"

namespace mptrack {

/// Complex scalar with both parts held at one precision level.
class MpComplex {
 public:
  explicit MpComplex(PrecisionLevel level = PrecisionLevel()) : re_(level), im_(level) {}

  MpComplex(MpReal re, MpReal im) : re_(std::move(re)), im_(std::move(im)) {
    if (re_.level() != im_.level()) {
      PrecisionLevel lvl = std::max(re_.level(), im_.level());
      re_ = re_.with_precision(lvl);
      im_ = im_.with_precision(lvl);
    }
  }

  MpComplex(double re, double im, PrecisionLevel level) : re_(re, level), im_(im, level) {}

  MpComplex(const ComplexRational& q, PrecisionLevel level)
      : re_(q.re.get_mpq_t(), level), im_(q.im.get_mpq_t(), level) {}

  const MpReal& re() const { return re_; }
  const MpReal& im() const { return im_; }
  PrecisionLevel level() const { return re_.level(); }

  MpComplex with_precision(PrecisionLevel level) const {
    return MpComplex(re_.with_precision(level), im_.with_precision(level));
  }

  bool is_zero() const { return re_.is_zero() && im_.is_zero(); }

  /// Euclidean modulus sqrt(re^2 + im^2) at the value's level.
  MpReal modulus() const { return hypot(re_, im_); }

  double modulus_double() const { return modulus().to_double(); }

  friend MpComplex operator+(const MpComplex& a, const MpComplex& b) {
    return MpComplex(a.re_ + b.re_, a.im_ + b.im_);
  }
  friend MpComplex operator-(const MpComplex& a, const MpComplex& b) {
    return MpComplex(a.re_ - b.re_, a.im_ - b.im_);
  }
  friend MpComplex operator-(const MpComplex& a) { return MpComplex(-a.re_, -a.im_); }

  friend MpComplex operator*(const MpComplex& a, const MpComplex& b) {
    return MpComplex(a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_);
  }

  friend MpComplex operator*(const MpReal& s, const MpComplex& a) {
    return MpComplex(s * a.re_, s * a.im_);
  }

  friend MpComplex operator/(const MpComplex& a, const MpComplex& b) {
    if (b.is_zero()) throw std::domain_error("complex division by exact zero");
    MpReal den = b.re_ * b.re_ + b.im_ * b.im_;
    return MpComplex((a.re_ * b.re_ + a.im_ * b.im_) / den,
                     (a.im_ * b.re_ - a.re_ * b.im_) / den);
  }

  friend bool operator==(const MpComplex& a, const MpComplex& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  std::string to_string() const { return re_.to_string() + " " + im_.to_string(); }

 private:
  MpReal re_;
  MpReal im_;
};

}  // namespace mptrack
