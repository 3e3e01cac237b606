#include <catch2/catch_amalgamated.hpp>

#include "mptrack/homotopy.hpp"
#include "mptrack/runner.hpp"
#include "test_support.hpp"

using namespace mptrack;
using mptest::random_point;

namespace {
const PrecisionLevel L128 = PrecisionLevel::from_bits(128);
const PrecisionLevel L256 = PrecisionLevel::from_bits(256);
}  // namespace

TEST_CASE("total-degree start counts and residuals") {
  Rng rng(1);
  StartSystem td = total_degree_start({"z1", "z2", "z3"}, {2, 3, 2}, rng);
  CHECK(td.points.size() == 12);
  for (const MpVector& p : td.points) {
    MpVector g = evaluate(td.system, p, MpComplex(L128), L128);
    CHECK(max_norm(g) < 1e-30);
  }

  Rng rng2(2);
  StartSystem single = total_degree_start({"z"}, {1}, rng2);
  REQUIRE(single.points.size() == 1);
  MpVector g = evaluate(single.system, single.points[0], MpComplex(L128), L128);
  CHECK(max_norm(g) < 1e-35);
}

TEST_CASE("linear blend endpoints") {
  Rng rng(3);
  SlpSystem f = parse_system("variables z1, z2;\nfunction z1^2 - z2;\nfunction z2^2 - 3;\n");
  Rng srng(4);
  StartSystem td = total_degree_start({"z1", "z2"}, {2, 2}, srng);
  ComplexRational gamma = rng.next_unit_rational();
  Homotopy h = make_linear_homotopy(f, td.system, gamma);

  for (int trial = 0; trial < 5; ++trial) {
    MpVector z = random_point(rng, 2, L128);
    MpVector f_val = evaluate(f, z, MpComplex(L128), L128);
    MpVector g_val = evaluate(td.system, z, MpComplex(L128), L128);
    MpVector h1 = evaluate(h.form, z, MpComplex(1.0, 0.0, L128), L128);
    MpVector h0 = evaluate(h.form, z, MpComplex(L128), L128);
    MpComplex gc(gamma, L128);
    for (std::size_t e = 0; e < 2; ++e) {
      CHECK((h1[e] - gc * g_val[e]).modulus_double() < 1e-33);
      CHECK((h0[e] - f_val[e]).modulus_double() < 1e-33);
    }
  }
}

TEST_CASE("griewank-osborne assembly") {
  SystemFile sf = parse_system_file(griewank_system_text());
  REQUIRE(sf.groups.size() == 2);
  REQUIRE(sf.patches.has_value());
  REQUIRE(sf.start.has_value());
  REQUIRE(sf.gamma.has_value());
  CHECK(*sf.gamma == ComplexRational(1, 0));

  // triple root of f at the origin
  MpVector origin(2, L128);
  MpVector f0 = evaluate(sf.target, origin, MpComplex(L128), L128);
  CHECK(max_norm(f0) == 0.0);

  // five consistent factor selections
  std::vector<MpVector> pts = griewank_start_points();
  REQUIRE(pts.size() == 5);

  // each start point satisfies the full start system (factors and patches)
  SlpBuilder bld({"z1", "z2", "H1", "H2"});
  for (std::uint32_t out : append_system(bld, *sf.start)) bld.output(out);
  for (std::uint32_t out : append_system(bld, *sf.patches)) bld.output(out);
  SlpSystem start_full = bld.finish();
  for (const MpVector& p : pts) {
    MpVector g = evaluate(start_full, p, MpComplex(L128), L128);
    CHECK(max_norm(g) < 1e-12);
  }

  // assembled homotopy: H(p, 1) ~ 0 at every start point
  Problem prob = assemble_problem(sf, pts, 1);
  CHECK(prob.homotopy.fixed_tail == 2);
  for (const MpVector& p : prob.start_points) {
    MpVector h1 = evaluate(prob.homotopy.form, p, MpComplex(1.0, 0.0, L128), L128);
    CHECK(max_norm(h1) < 1e-12);
  }
}

TEST_CASE("chemical generation and start residuals") {
  GeneratedProblem gen = gen_chemical(7);
  SystemFile sf = parse_system_file(gen.system_text);
  CHECK(sf.groups.size() == 1);
  CHECK(sf.target.degrees() == std::vector<int>{2, 3, 2});
  REQUIRE(gen.start_points.size() == 12);

  Problem prob = assemble_problem(sf, gen.start_points, 7);
  for (const MpVector& p : prob.start_points) {
    MpVector h1 = evaluate(prob.homotopy.form, p, MpComplex(1.0, 0.0, L128), L128);
    CHECK(max_norm(h1) < 1e-25);
  }
}

TEST_CASE("recursion polynomial roots verify at 256 bits") {
  // Residual at a root rounded to 256 bits: the rounding alone contributes
  // about |T'| * u, so Psi * u is the attainable bound here.
  for (int n : {10, 25, 50}) {
    SlpSystem T = chebyshev(n);
    double psi_bound = coeff_bounds(T).Psi;
    std::vector<MpReal> roots = chebyshev_roots(n, L256);
    REQUIRE(roots.size() == static_cast<std::size_t>(n));
    for (const MpReal& r : roots) {
      MpVector x(1, L256);
      x.set(0, MpComplex(r, MpReal(L256)));
      MpVector v = evaluate(T, x, MpComplex(L256), L256);
      CHECK(max_norm(v) <= psi_bound * L256.unit_roundoff());
    }
  }
}

TEST_CASE("auto-generated start for a grouped system lifts through the patch") {
  // no start_function: the runner builds a homogenized total-degree start
  SystemFile sf = parse_system_file(
      "variables z1, z2;\n"
      "group H: z1, z2;\n"
      "function z1^2 - 1;\n"
      "function z2^2 - z1;\n");
  Problem prob = assemble_problem(sf, std::nullopt, 99);
  CHECK(prob.start_points.size() == 4);
  for (const MpVector& p : prob.start_points) {
    MpVector h1 = evaluate(prob.homotopy.form, p, MpComplex(1.0, 0.0, L128), L128);
    CHECK(max_norm(h1) < 1e-25);
  }
}

TEST_CASE("one corrector pass at 128 bits lands start points on the homotopy") {
  GeneratedProblem gen = gen_chebyshev(6, 5);
  SystemFile sf = parse_system_file(gen.system_text);
  Problem prob = assemble_problem(sf, gen.start_points, 5);
  ErrorModel m;
  m.tau = 10;
  m.N = 1;
  m.eps_E = 1;
  for (const MpVector& p : prob.start_points) {
    CorrectorResult c = newton_correct(prob.homotopy.form, p.with_precision(L128), 1.0, L128, m,
                                       1.0, 1.0, false, 1024);
    MpVector h1 = evaluate(prob.homotopy.form, c.z, MpComplex(1.0, 0.0, L128), L128);
    CHECK(max_norm(h1) <= 1e-10);
  }
}
