#pragma once

#include <cstdint>

#include "mptrack/complexnum.hpp"
#include "mptrack/precision.hpp"
#include "mptrack/rational.hpp"

namespace mptrack {

/// Deterministic 64-bit generator (splitmix64). Self-contained so that seeded
/// runs reproduce bit-identically across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream for a numbered subtask (e.g. one per path).
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    Rng mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    mix.next_u64();
    return mix;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform-ish point on the complex unit circle, exactly unit modulus:
  /// with s = tan(theta/2) rational, ((1-s^2) + 2s*i)/(1+s^2) lies on the circle.
  ComplexRational next_unit_rational() {
    // Small numerator/denominator keeps downstream rationals compact.
    std::int64_t num = static_cast<std::int64_t>(next_u64() % 2000001) - 1000000;
    mpq_class s(num, 1000000);
    s.canonicalize();
    mpq_class s2 = s * s;
    mpq_class den = 1 + s2;
    ComplexRational z((1 - s2) / den, 2 * s / den);
    if (next_u64() & 1) z.re = -z.re;  // cover the left half-circle too
    return z;
  }

  /// Unit-modulus complex at a working level (modulus 1 to roundoff).
  MpComplex next_unit_complex(PrecisionLevel level) {
    return MpComplex(next_unit_rational(), level);
  }

 private:
  std::uint64_t state_;
};

}  // namespace mptrack
