#include <catch2/catch_amalgamated.hpp>

#include "mptrack/precision.hpp"

using mptrack::PrecisionLevel;

TEST_CASE("unit roundoff is 2^-bits") {
  CHECK(PrecisionLevel::from_bits(52).unit_roundoff() ==
        Catch::Approx(2.220446049250313e-16).epsilon(1e-15));
  CHECK(PrecisionLevel::from_bits(52).unit_roundoff() == std::ldexp(1.0, -52));
  CHECK(PrecisionLevel::from_bits(96).unit_roundoff() == std::ldexp(1.0, -96));
  CHECK(PrecisionLevel::from_bits(1024).unit_roundoff() == std::ldexp(1.0, -1024));
}

TEST_CASE("decimal digits per mantissa width") {
  // the bits <-> digits correspondence of 32-bit precision packets
  CHECK(PrecisionLevel::from_bits(52).decimal_digits() == 15);
  CHECK(PrecisionLevel::from_bits(64).decimal_digits() == 19);
  CHECK(PrecisionLevel::from_bits(96).decimal_digits() == 28);
  CHECK(PrecisionLevel::from_bits(128).decimal_digits() == 38);
  CHECK(PrecisionLevel::from_bits(256).decimal_digits() == 77);
}

TEST_CASE("lattice membership") {
  CHECK_NOTHROW(PrecisionLevel::from_bits(52));
  CHECK_NOTHROW(PrecisionLevel::from_bits(64));
  CHECK_NOTHROW(PrecisionLevel::from_bits(96));
  CHECK_NOTHROW(PrecisionLevel::from_bits(1024));
  CHECK_THROWS_AS(PrecisionLevel::from_bits(53), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionLevel::from_bits(48), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionLevel::from_bits(80), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionLevel::from_bits(0), std::invalid_argument);
}

TEST_CASE("lattice navigation and order") {
  PrecisionLevel p;
  CHECK(p.bits() == 52);
  CHECK(p.next_up().bits() == 64);
  CHECK(p.next_up().next_up().bits() == 96);
  CHECK(PrecisionLevel::from_bits(96).next_down().bits() == 64);
  CHECK(PrecisionLevel::from_bits(64).next_down().bits() == 52);
  CHECK(PrecisionLevel::from_bits(52).next_down().bits() == 52);
  CHECK(PrecisionLevel::from_bits(64) > PrecisionLevel::from_bits(52));
}

TEST_CASE("roundoff decreasing, digits increasing along the lattice") {
  PrecisionLevel p;
  for (int i = 0; i < 20; ++i) {
    PrecisionLevel q = p.next_up();
    CHECK(q.unit_roundoff() < p.unit_roundoff());
    CHECK(q.decimal_digits() > p.decimal_digits());
    p = q;
  }
}

TEST_CASE("level selection strictly exceeds the digit requirement") {
  auto lvl = PrecisionLevel::for_digits(14.0);
  REQUIRE(lvl.has_value());
  CHECK(lvl->bits() == 52);

  // 15 digits is not strictly more than double's 15
  lvl = PrecisionLevel::for_digits(15.0);
  REQUIRE(lvl.has_value());
  CHECK(lvl->bits() == 64);

  lvl = PrecisionLevel::for_digits(23.1);
  REQUIRE(lvl.has_value());
  CHECK(lvl->bits() == 96);

  CHECK_FALSE(PrecisionLevel::for_digits(1e6, 1024).has_value());
  CHECK_FALSE(PrecisionLevel::for_digits(std::nan(""), 1024).has_value());

  for (double d : {0.0, 3.7, 15.0, 18.99, 19.0, 27.5, 100.0}) {
    auto l = PrecisionLevel::for_digits(d);
    REQUIRE(l.has_value());
    CHECK(static_cast<double>(l->decimal_digits()) > d);
    if (l->bits() > 52) {
      CHECK(static_cast<double>(l->next_down().decimal_digits()) <= d);
    }
  }
}
