#include <catch2/catch_amalgamated.hpp>

#include "mptrack/containers.hpp"
#include "mptrack/rational.hpp"
#include "mptrack/rng.hpp"

using namespace mptrack;

namespace {
const PrecisionLevel L52 = PrecisionLevel::from_bits(52);
const PrecisionLevel L96 = PrecisionLevel::from_bits(96);
const PrecisionLevel L256 = PrecisionLevel::from_bits(256);
}  // namespace

TEST_CASE("precision raising preserves values exactly") {
  MpComplex one(1.0, 0.0, L52);
  MpComplex raised = one.with_precision(L96);
  CHECK(raised.level().bits() == 96);
  CHECK(raised == one.with_precision(L96));
  CHECK(raised.re().to_double() == 1.0);

  // raise then lower is the identity
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    MpComplex x(rng.next_unit() * 20 - 10, rng.next_unit() * 20 - 10, L52);
    CHECK(x.with_precision(L256).with_precision(L52) == x);
  }
}

TEST_CASE("lowering rounds to nearest") {
  mpq_class third(1, 3);
  MpReal at256(third.get_mpq_t(), L256);
  MpReal lowered = at256.with_precision(L52);
  CHECK(lowered.to_double() == 1.0 / 3.0);  // nearest double to 1/3
}

TEST_CASE("round-trip through intermediate levels collapses") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    mpq_class q(static_cast<long>(rng.next_u64() % 100000) - 50000,
                static_cast<long>(rng.next_u64() % 99999) + 1);
    q.canonicalize();
    MpReal x(q.get_mpq_t(), L256);
    MpReal direct = x.with_precision(L52);
    MpReal via96 = x.with_precision(L96).with_precision(L52);
    CHECK(direct == via96);
  }
}

TEST_CASE("exact arithmetic identities") {
  MpComplex one(1.0, 0.0, L52);
  CHECK((one + one).re().to_double() == 2.0);
  MpComplex i(0.0, 1.0, L96);
  MpComplex ii = i * i;
  CHECK(ii.re().to_double() == -1.0);
  CHECK(ii.im().is_zero());
}

TEST_CASE("division residual against a high-precision reference") {
  MpComplex one(1.0, 0.0, L52);
  MpComplex three(3.0, 0.0, L52);
  MpComplex x = one / three;
  // |3x - 1| <= 3 * 2^-52
  MpComplex resid = three.with_precision(L256) * x.with_precision(L256) - one.with_precision(L256);
  CHECK(resid.modulus_double() <= 3.0 * std::ldexp(1.0, -52));
  CHECK(resid.modulus_double() > 0.0);
}

TEST_CASE("52-bit operations stay within 2 ulp of the 256-bit reference") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    MpComplex a(rng.next_unit() * 4 - 2, rng.next_unit() * 4 - 2, L52);
    MpComplex b(rng.next_unit() * 4 - 2, rng.next_unit() * 4 - 2, L52);
    if (b.is_zero()) continue;
    MpComplex q52 = a / b;
    MpComplex q256 = a.with_precision(L256) / b.with_precision(L256);
    double err = (q52.with_precision(L256) - q256).modulus_double();
    double scale = q256.modulus_double();
    CHECK(err <= 2.0 * std::ldexp(1.0, -52) * std::max(scale, 1e-300));

    MpComplex m52 = a * b;
    MpComplex m256 = a.with_precision(L256) * b.with_precision(L256);
    double merr = (m52.with_precision(L256) - m256).modulus_double();
    CHECK(merr <= 2.0 * std::ldexp(1.0, -52) * std::max(m256.modulus_double(), 1e-300));
  }
}

TEST_CASE("division by exact zero is a domain error") {
  MpComplex a(1.0, 2.0, L52);
  CHECK_THROWS_AS(a / MpComplex(L52), std::domain_error);
}

TEST_CASE("max norm uses the Euclidean modulus") {
  MpVector v(3, L52);
  v.set(0, MpComplex(1.0, 0.0, L52));
  v.set(1, MpComplex(-2.0, 0.0, L52));
  v.set(2, MpComplex(0.0, 1.0, L52));
  CHECK(max_norm(v) == 2.0);

  MpVector zero(4, L52);
  CHECK(max_norm(zero) == 0.0);

  MpVector w(1, L52);
  w.set(0, MpComplex(3.0, 4.0, L52));
  CHECK(max_norm(w) == 5.0);
}

TEST_CASE("decimal literals become exact rationals") {
  CHECK(rational_from_literal("29/16") == mpq_class(29, 16));
  CHECK(rational_from_literal("0.5") == mpq_class(1, 2));
  CHECK(rational_from_literal("0.000000002") == mpq_class(1, 500000000));
  CHECK(rational_from_literal("2e-9") == mpq_class(1, 500000000));
  CHECK(rational_from_literal("-0.13") == mpq_class(-13, 100));
  CHECK(rational_from_literal("1.5e3") == mpq_class(1500));
  CHECK_THROWS(rational_from_literal("1/0"));
  CHECK_THROWS(rational_from_literal("abc"));
}

TEST_CASE("seeded unit draws have exactly unit modulus") {
  Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    ComplexRational z = rng.next_unit_rational();
    CHECK(z.re * z.re + z.im * z.im == 1);
  }
}

TEST_CASE("string round trip at the stated precision") {
  Rng rng(5);
  for (PrecisionLevel lvl : {L52, L96, L256}) {
    for (int i = 0; i < 20; ++i) {
      MpReal x(rng.next_unit() * 1e3 - 500, lvl);
      MpReal back = MpReal::from_string(x.to_string(), lvl);
      CHECK(back == x);
    }
  }
}
