#include <catch2/catch_amalgamated.hpp>

#include "mptrack/homotopy.hpp"
#include "mptrack/parser.hpp"
#include "mptrack/poly.hpp"
#include "mptrack/slp.hpp"
#include "test_support.hpp"

using namespace mptrack;
using mptest::fd_jacobian;
using mptest::random_point;
using mptest::random_system;

namespace {
const PrecisionLevel L52 = PrecisionLevel::from_bits(52);
const PrecisionLevel L128 = PrecisionLevel::from_bits(128);
const PrecisionLevel L256 = PrecisionLevel::from_bits(256);

MpVector point1(double re, PrecisionLevel lvl = L52) {
  MpVector z(1, lvl);
  z.set(0, MpComplex(re, 0.0, lvl));
  return z;
}
}  // namespace

TEST_CASE("parse and evaluate simple polynomials") {
  SlpSystem sys = parse_system("variables z1;\nfunction z1^2 - 1;\n");
  CHECK(evaluate(sys, point1(2.0), MpComplex(L52), L52)[0].re().to_double() == 3.0);
  CHECK(sys.degrees() == std::vector<int>{2});

  SlpSystem two = parse_system("variables z1, z2;\nfunction (29/16)*z1^3 - 2*z1*z2;\n");
  MpVector z(2, L52);
  z.set(0, MpComplex(2.0, 0.0, L52));
  z.set(1, MpComplex(1.0, 0.0, L52));
  CHECK(evaluate(two, z, MpComplex(L52), L52)[0].re().to_double() == 10.5);
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_system("variables z1;\nfunction z1^2 -;\n"), ParseError);
  CHECK_THROWS_AS(parse_system("variables z1;\nfunction z1 + w;\n"), ParseError);
  CHECK_THROWS_AS(parse_system("variables z1;\nfunction z1^1.5;\n"), ParseError);
  CHECK_THROWS_AS(parse_system("variables z1;\nfunction z1^-2;\n"), ParseError);
  CHECK_THROWS_AS(parse_system("variables z1;\nfunction z1/z1;\n"), ParseError);
  CHECK_THROWS_AS(parse_system("variables z1;\nfunction z1 + t;\n"), ParseError);
  try {
    parse_system("variables z1;\nfunction z1^2 -;\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.col() > 1);
  }
}

TEST_CASE("imaginary unit and complex constants") {
  SlpSystem sys = parse_system("variables z;\nfunction (3 + 4*I)*z;\n");
  MpVector out = evaluate(sys, point1(1.0), MpComplex(L52), L52);
  CHECK(out[0].re().to_double() == 3.0);
  CHECK(out[0].im().to_double() == 4.0);
}

TEST_CASE("define chains expand to shared slots") {
  SlpSystem sys = parse_system(
      "variables x;\n"
      "define A = x^2;\n"
      "define B = A*A - x;\n"
      "function B + A;\n");
  // B + A = x^4 - x + x^2
  MpVector out = evaluate(sys, point1(2.0), MpComplex(L52), L52);
  CHECK(out[0].re().to_double() == 16.0 - 2.0 + 4.0);
}

TEST_CASE("evaluation matches the recursion examples") {
  SlpSystem t2 = chebyshev(2);
  CHECK(evaluate(t2, point1(1.0), MpComplex(L52), L52)[0].re().to_double() == 0.5);

  SlpSystem grie = parse_system(
      "variables z1, z2;\nfunction (29/16)*z1^3 - 2*z1*z2;\nfunction z2 - z1^2;\n");
  MpVector origin(2, L52);
  MpVector v = evaluate(grie, origin, MpComplex(L52), L52);
  CHECK(v[0].is_zero());
  CHECK(v[1].is_zero());

  SlpSystem chem = chemical_system();
  MpVector p(3, L52);
  p.set(2, MpComplex(1.0, 0.0, L52));
  CHECK(evaluate(chem, p, MpComplex(L52), L52)[2].re().to_double() ==
        Catch::Approx(-849.96).margin(1e-12));
  CHECK(chem.degrees() == std::vector<int>{2, 3, 2});
}

TEST_CASE("jacobian basics") {
  SlpSystem sq = parse_system("variables z1;\nfunction z1^2;\n");
  SlpJacobian j = jacobian(sq, point1(3.0), MpComplex(L52), L52);
  CHECK(j.dz.at(0, 0).re().to_double() == 6.0);
  CHECK(j.dt[0].is_zero());

  // H = z - t
  SlpBuilder bld({"z"});
  bld.output(bld.sub(bld.variable(0), bld.t()));
  SlpSystem h = bld.finish();
  SlpJacobian jh = jacobian(h, point1(5.0), MpComplex(0.25, 0.0, L52), L52);
  CHECK(jh.dz.at(0, 0).re().to_double() == 1.0);
  CHECK(jh.dt[0].re().to_double() == -1.0);
}

TEST_CASE("random cubic jacobian matches 256-bit central differences") {
  Rng rng(2024);
  SlpSystem sys = random_system(rng, 3, 3, 3, 4);
  MpVector z = random_point(rng, 3, L256);
  MpComplex t(L256);
  SlpJacobian jac = jacobian(sys, z, t, L256);
  auto fd = fd_jacobian(sys, z, t, L256);
  for (std::size_t e = 0; e < 3; ++e) {
    for (std::size_t v = 0; v < 3; ++v) {
      double scale = std::max(1e-30, fd.dz.at(e, v).modulus_double());
      double err = (jac.dz.at(e, v) - fd.dz.at(e, v)).modulus_double();
      CHECK(err / scale < 1e-20);
    }
  }
}

TEST_CASE("forward derivatives track finite differences at 4x working precision") {
  Rng rng(555);
  const double u = L52.unit_roundoff();
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n = 1 + rng.next_u64() % 4;
    SlpSystem sys = random_system(rng, n, n, 3, 4, true);
    MpVector z = random_point(rng, n, L52);
    MpComplex t(rng.next_unit(), 0.0, L52);
    SlpJacobian jac = jacobian(sys, z, t, L52);
    auto fd = fd_jacobian(sys, z.with_precision(L256), t.with_precision(L256), L256);
    for (std::size_t e = 0; e < n; ++e) {
      for (std::size_t v = 0; v < n; ++v) {
        double ref = fd.dz.at(e, v).modulus_double();
        double err =
            (jac.dz.at(e, v).with_precision(L256) - fd.dz.at(e, v)).modulus_double();
        CHECK(err <= 1e3 * u * std::max(ref, 1.0));
      }
      double terr = (jac.dt[e].with_precision(L256) - fd.dt[e]).modulus_double();
      CHECK(terr <= 1e3 * u * std::max(fd.dt[e].modulus_double(), 1.0));
    }
  }
}

TEST_CASE("homogenize one group") {
  SystemFile sf = parse_system_file(
      "variables z;\n"
      "group H: z;\n"
      "patch H - 1;\n"
      "function z^2 - 1;\n");
  SlpSystem hom = homogenize(sf.target, sf.groups, *sf.patches);
  REQUIRE(hom.num_equations() == 2);  // lifted equation + patch
  REQUIRE(hom.num_variables() == 2);

  // G(z, 1) = g(z)
  for (double zv : {0.3, 1.7, -2.0}) {
    MpVector x(2, L128);
    x.set(0, MpComplex(zv, 0.0, L128));
    x.set(1, MpComplex(1.0, 0.0, L128));
    MpVector out = evaluate(hom, x, MpComplex(L128), L128);
    CHECK(out[0].re().to_double() == Catch::Approx(zv * zv - 1.0).margin(1e-30));
  }
}

TEST_CASE("homogenize gives exact homogeneity under group scaling") {
  Rng rng(77);
  SystemFile sf = parse_system_file(
      "variables z1, z2;\n"
      "group H1: z1;\n"
      "group H2: z2;\n"
      "patch z1 + H1 - 1;\n"
      "patch z2 + H2 - 1;\n"
      "function (29/16)*z1^3 - 2*z1*z2;\n"
      "function z2 - z1^2;\n");
  SlpSystem hom = homogenize(sf.target, sf.groups, *sf.patches);

  // multidegrees (3,1) and (2,1)
  std::vector<SparsePoly> eqs = expand_to_monomials(hom);
  auto group_degree = [&](const SparsePoly& eq, std::initializer_list<int> vars) {
    long d = 0;
    for (const auto& [k, c] : eq) {
      long s = 0;
      for (int v : vars) s += k[v];
      d = std::max(d, s);
    }
    return d;
  };
  CHECK(group_degree(eqs[0], {0, 2}) == 3);  // z1, H1
  CHECK(group_degree(eqs[0], {1, 3}) == 1);  // z2, H2
  CHECK(group_degree(eqs[1], {0, 2}) == 2);
  CHECK(group_degree(eqs[1], {1, 3}) == 1);

  // h(lambda-scaled x) = prod lambda_g^{D_g} h(x) at 128 bits
  for (int trial = 0; trial < 5; ++trial) {
    MpVector x = random_point(rng, 4, L128);
    MpComplex l1(rng.next_unit() + 0.5, rng.next_unit(), L128);
    MpComplex l2(rng.next_unit() + 0.5, rng.next_unit(), L128);
    MpVector scaled(4, L128);
    scaled.set(0, x[0] * l1);
    scaled.set(1, x[1] * l2);
    scaled.set(2, x[2] * l1);
    scaled.set(3, x[3] * l2);
    MpVector base = evaluate(hom, x, MpComplex(L128), L128);
    MpVector sc = evaluate(hom, scaled, MpComplex(L128), L128);
    MpComplex f1 = l1 * l1 * l1 * l2 * base[0];
    MpComplex f2 = l1 * l1 * l2 * base[1];
    CHECK((sc[0] - f1).modulus_double() <= 1e-30 * std::max(1.0, f1.modulus_double()));
    CHECK((sc[1] - f2).modulus_double() <= 1e-30 * std::max(1.0, f2.modulus_double()));
  }
}

TEST_CASE("homogenize validates its inputs") {
  SystemFile sf = parse_system_file(
      "variables z1, z2;\n"
      "group H1: z1;\n"
      "patch z1 + H1 - 1;\n"
      "function z1*z2;\n"
      "function z2 - 1;\n");
  // group does not cover z2
  CHECK_THROWS_AS(homogenize(sf.target, sf.groups, *sf.patches), std::invalid_argument);
}

TEST_CASE("coefficient bounds match the published figures") {
  // Griewank-Osborne, two-group homogenization: D = 3, sum|c| ~ 4
  SystemFile gf = parse_system_file(griewank_system_text());
  SlpSystem hom = homogenize(gf.target, gf.groups, *gf.patches);
  CoeffBounds gb = coeff_bounds(hom);
  CHECK(gb.Psi > 11.0);
  CHECK(gb.Psi < 12.5);
  CHECK(gb.Phi > 22.0);
  CHECK(gb.Phi < 25.0);

  // chemical system: Psi = 120000, Phi = 240000
  CoeffBounds cb = coeff_bounds(chemical_system());
  CHECK(cb.Psi == Catch::Approx(120000.0).epsilon(1e-3));
  CHECK(cb.Phi == Catch::Approx(240000.0).epsilon(1e-3));

  // recursion polynomials: sum|c_i| estimates 7 (deg 10), 111 (deg 25),
  // 12300 (deg 50)
  CHECK(coeff_bounds(chebyshev(10)).Psi / 10 == Catch::Approx(7).epsilon(0.1));
  CHECK(coeff_bounds(chebyshev(25)).Psi / 25 == Catch::Approx(111).epsilon(0.05));
  CHECK(coeff_bounds(chebyshev(50)).Psi / 50 == Catch::Approx(12300).epsilon(0.05));
}

TEST_CASE("error accumulation bounds") {
  // an exactly representable constant alone has no error
  SlpBuilder bld({"x"});
  bld.output(bld.constant(ComplexRational(mpq_class(3, 4), mpq_class(0))));
  SlpSystem c = bld.finish();
  MpVector empty_x(1, L52);
  CHECK(accumulate_error(c, empty_x, MpComplex(L52), L52) == 0.0);

  // x^2 at x = 1: one product rule application, psi <= 2u
  SlpSystem sq = parse_system("variables x;\nfunction x^2;\n");
  double psi = accumulate_error(sq, point1(1.0), MpComplex(L52), L52);
  CHECK(psi <= 2.0 * std::ldexp(1.0, -52) * 1.0000001);
  CHECK(psi > 0.0);
}

TEST_CASE("error containment against the 256-bit reference") {
  Rng rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + rng.next_u64() % 3;
    SlpSystem sys = random_system(rng, n, 2, 4, 5);
    MpVector z = random_point(rng, n, L52);
    MpComplex t(L52);
    double psi = accumulate_error(sys, z, t, L52);
    MpVector at52 = evaluate(sys, z, t, L52);
    MpVector ref = evaluate(sys, z.with_precision(L256), t.with_precision(L256), L256);
    double err = 0;
    for (std::size_t e = 0; e < sys.num_equations(); ++e) {
      err = std::max(err, (at52[e].with_precision(L256) - ref[e]).modulus_double());
    }
    CHECK(err <= psi);
  }
}

TEST_CASE("constants re-round at the evaluation precision") {
  SlpSystem sys = parse_system("variables x;\nfunction x + 1/3;\n");
  MpVector zero(1, L256);
  MpVector out = evaluate(sys, zero, MpComplex(L256), L256);
  mpq_class third(1, 3);
  MpReal ref(third.get_mpq_t(), L256);
  CHECK(out[0].re() == ref);  // accurate to 256 bits, not frozen at 52
}

TEST_CASE("monomial expansion guard") {
  // (1 + z1 + ... + z6)^24 would have far too many terms
  std::string text = "variables z1, z2, z3, z4, z5, z6;\nfunction (1";
  for (int i = 1; i <= 6; ++i) text += " + z" + std::to_string(i);
  text += ")^24;\n";
  for (int i = 1; i < 6; ++i) text += "function z" + std::to_string(i) + ";\n";
  SlpSystem sys = parse_system(text);
  CHECK_THROWS_AS(coeff_bounds(sys), std::runtime_error);
}
