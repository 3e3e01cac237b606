#pragma once

#include <cmath>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>

#include <mpfr.h>

namespace mptrack {

/// A mantissa width from the discrete precision lattice {52, 64, 96, 128, ...}:
/// hardware double plus 32-bit packets. Total order by bit count.
class PrecisionLevel {
 public:
  static constexpr int kDoubleBits = 52;
  static constexpr int kDefaultMaxBits = 1024;

  constexpr PrecisionLevel() : bits_(kDoubleBits) {}

  static PrecisionLevel from_bits(int bits) {
    if (!on_lattice(bits)) {
      throw std::invalid_argument("precision bits " + std::to_string(bits) +
                                  " not on lattice {52, 64, 96, ...}");
    }
    return PrecisionLevel(bits);
  }

  static constexpr bool on_lattice(int bits) {
    return bits == kDoubleBits || (bits >= 64 && (bits - 64) % 32 == 0);
  }

  constexpr int bits() const { return bits_; }

  /// u = 2^(-bits). Exact: every lattice value is a representable power of two.
  double unit_roundoff() const { return std::ldexp(1.0, -bits_); }

  /// P = floor(bits * log10(2)), the decimal-digit equivalent of the mantissa.
  int decimal_digits() const {
    return static_cast<int>(std::floor(static_cast<double>(bits_) * kLog10Of2));
  }

  PrecisionLevel next_up() const {
    return PrecisionLevel(bits_ == kDoubleBits ? 64 : bits_ + 32);
  }

  /// Next level down the lattice; 52 bits is the floor.
  PrecisionLevel next_down() const {
    if (bits_ == kDoubleBits) return *this;
    return PrecisionLevel(bits_ == 64 ? kDoubleBits : bits_ - 32);
  }

  /// Smallest lattice level whose decimal_digits strictly exceeds `digits`,
  /// or nullopt if no level within `max_bits` qualifies.
  static std::optional<PrecisionLevel> for_digits(double digits,
                                                  int max_bits = kDefaultMaxBits) {
    if (std::isnan(digits)) return std::nullopt;
    for (PrecisionLevel lvl;; lvl = lvl.next_up()) {
      if (lvl.bits() > max_bits) return std::nullopt;
      if (static_cast<double>(lvl.decimal_digits()) > digits) return lvl;
    }
  }

  /// MPFR significand width carrying this level. The 52-bit level is backed by
  /// a 53-bit significand so that it coincides with IEEE double values.
  mpfr_prec_t mpfr_prec() const { return bits_ == kDoubleBits ? 53 : bits_; }

  static PrecisionLevel from_mpfr_prec(mpfr_prec_t p) {
    return PrecisionLevel(p == 53 ? kDoubleBits : static_cast<int>(p));
  }

  /// Significant decimal digits needed to round-trip a value at this level.
  int roundtrip_digits() const {
    return static_cast<int>(std::ceil(static_cast<double>(mpfr_prec()) * kLog10Of2)) + 1;
  }

  friend auto operator<=>(PrecisionLevel a, PrecisionLevel b) = default;

 private:
  explicit constexpr PrecisionLevel(int bits) : bits_(bits) {}

  static constexpr double kLog10Of2 = 0.30102999566398119521;

  int bits_;
};

}  // namespace mptrack
