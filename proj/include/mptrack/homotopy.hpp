#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mptrack/linalg.hpp"
#include "mptrack/parser.hpp"
#include "mptrack/poly.hpp"
#include "mptrack/rng.hpp"
#include "mptrack/slp.hpp"

namespace mptrack {

/// Re-emit `sys` into `bld` (same variable list), returning the slots of its
/// outputs. Constants merge through the builder's table.
inline std::vector<std::uint32_t> append_system(SlpBuilder& bld, const SlpSystem& sys) {
  std::vector<std::uint32_t> map(sys.code().size());
  for (std::size_t i = 0; i < sys.code().size(); ++i) {
    const SlpInstr& ins = sys.code()[i];
    switch (ins.op) {
      case SlpOp::Const:
        map[i] = bld.constant(sys.constants()[ins.a]);
        break;
      case SlpOp::Var:
        map[i] = bld.variable(ins.a);
        break;
      case SlpOp::TVar:
        map[i] = bld.t();
        break;
      case SlpOp::Add:
        map[i] = bld.add(map[ins.a], map[ins.b]);
        break;
      case SlpOp::Sub:
        map[i] = bld.sub(map[ins.a], map[ins.b]);
        break;
      case SlpOp::Mul:
        map[i] = bld.mul(map[ins.a], map[ins.b]);
        break;
      case SlpOp::Neg:
        map[i] = bld.neg(map[ins.a]);
        break;
    }
  }
  std::vector<std::uint32_t> outs;
  outs.reserve(sys.num_equations());
  for (std::uint32_t o : sys.outputs()) outs.push_back(map[o]);
  return outs;
}

/// H(z,t) = gamma * t * g(z) + (1-t) * f(z), with the last `fixed_tail`
/// equations (patches) carried over unblended. H(z,1) = gamma*g, H(z,0) = f.
struct Homotopy {
  SlpSystem form;          // H(z, t), including the fixed tail
  SlpSystem target;        // f with the fixed tail; H(., 0)
  ComplexRational gamma{1, 0};
  std::size_t fixed_tail = 0;
};

inline Homotopy make_linear_homotopy(const SlpSystem& target, const SlpSystem& start,
                                     const ComplexRational& gamma, std::size_t fixed_tail = 0) {
  if (target.variables() != start.variables()) {
    throw std::invalid_argument("homotopy target and start must share variables");
  }
  if (target.num_equations() != start.num_equations()) {
    throw std::invalid_argument("homotopy target and start must have equal equation counts");
  }
  if (fixed_tail > target.num_equations()) throw std::invalid_argument("fixed tail too long");
  if (target.uses_t() || start.uses_t()) {
    throw std::invalid_argument("target and start systems must be t-independent");
  }

  SlpBuilder bld(target.variables());
  std::vector<std::uint32_t> f = append_system(bld, target);
  std::vector<std::uint32_t> g = append_system(bld, start);
  std::uint32_t gamma_t = bld.mul(bld.constant(gamma), bld.t());
  std::uint32_t one_minus_t = bld.sub(bld.constant(ComplexRational(1, 0)), bld.t());
  const std::size_t blended = target.num_equations() - fixed_tail;
  for (std::size_t i = 0; i < blended; ++i) {
    bld.output(bld.add(bld.mul(gamma_t, g[i]), bld.mul(one_minus_t, f[i])));
  }
  for (std::size_t i = blended; i < target.num_equations(); ++i) bld.output(f[i]);

  Homotopy h;
  h.form = bld.finish();
  if (target.homogenization().has_value()) {
    h.form.set_homogenization(*target.homogenization());
  }
  h.target = target;
  h.gamma = gamma;
  h.fixed_tail = fixed_tail;
  return h;
}

/// A start system with its known solutions.
struct StartSystem {
  SlpSystem system;
  std::vector<MpVector> points;
};

namespace detail {

inline PrecisionLevel start_point_level() { return PrecisionLevel::from_bits(128); }

/// All d-th roots of a unit-modulus constant, at the start-point level.
inline std::vector<MpComplex> roots_of(const ComplexRational& r, int d, PrecisionLevel level) {
  MpComplex rc(r, level);
  MpReal theta(level);
  mpfr_atan2(theta.raw(), rc.im().raw(), rc.re().raw(), MPFR_RNDN);
  MpReal two_pi(level);
  mpfr_const_pi(two_pi.raw(), MPFR_RNDN);
  mpfr_mul_ui(two_pi.raw(), two_pi.raw(), 2, MPFR_RNDN);
  std::vector<MpComplex> out;
  out.reserve(d);
  for (int j = 0; j < d; ++j) {
    MpReal ang(level);
    mpfr_mul_ui(ang.raw(), two_pi.raw(), static_cast<unsigned long>(j), MPFR_RNDN);
    mpfr_add(ang.raw(), ang.raw(), theta.raw(), MPFR_RNDN);
    mpfr_div_ui(ang.raw(), ang.raw(), static_cast<unsigned long>(d), MPFR_RNDN);
    MpReal c(level), s(level);
    mpfr_sin_cos(s.raw(), c.raw(), ang.raw(), MPFR_RNDN);
    out.emplace_back(std::move(c), std::move(s));
  }
  return out;
}

}  // namespace detail

/// Total-degree start: g_i = z_i^{d_i} - r_i with seeded unit-modulus r_i.
/// Start points are all combinations of the d_i-th roots; path count is the
/// product of the degrees.
inline StartSystem total_degree_start(const std::vector<std::string>& vars,
                                      const std::vector<int>& degrees, Rng& rng) {
  if (vars.size() != degrees.size()) {
    throw std::invalid_argument("one degree per variable required");
  }
  const PrecisionLevel level = detail::start_point_level();
  SlpBuilder bld(vars);
  std::vector<std::vector<MpComplex>> roots;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (degrees[i] < 1) throw std::invalid_argument("degrees must be >= 1");
    ComplexRational r = rng.next_unit_rational();
    std::uint32_t zi = bld.variable(static_cast<std::uint32_t>(i));
    std::uint32_t lhs = degrees[i] == 1 ? zi : bld.pow(zi, degrees[i]);
    bld.output(bld.sub(lhs, bld.constant(r)));
    roots.push_back(detail::roots_of(r, degrees[i], level));
  }

  StartSystem out;
  out.system = bld.finish();

  std::size_t count = 1;
  for (int d : degrees) count *= static_cast<std::size_t>(d);
  std::vector<std::size_t> idx(vars.size(), 0);
  for (std::size_t p = 0; p < count; ++p) {
    MpVector pt(vars.size(), level);
    for (std::size_t i = 0; i < vars.size(); ++i) pt.set(i, roots[i][idx[i]]);
    out.points.push_back(std::move(pt));
    for (std::size_t i = vars.size(); i-- > 0;) {
      if (++idx[i] < static_cast<std::size_t>(degrees[i])) break;
      idx[i] = 0;
    }
  }
  return out;
}

/// Chebyshev-style recursion P_0 = 2, P_1 = x, P_i = x P_{i-1} - P_{i-2}/4,
/// as a one-variable SLP with degree-n output.
inline SlpSystem chebyshev(int n) {
  if (n < 1) throw std::invalid_argument("chebyshev degree must be >= 1");
  SlpBuilder bld({"x"});
  std::uint32_t x = bld.variable(0);
  std::uint32_t quarter = bld.constant(ComplexRational(mpq_class(1, 4)));
  std::uint32_t prev2 = bld.constant(ComplexRational(2, 0));  // P_0
  std::uint32_t prev1 = x;                                    // P_1
  if (n == 1) {
    bld.output(prev1);
    return bld.finish();
  }
  for (int i = 2; i <= n; ++i) {
    std::uint32_t cur = bld.sub(bld.mul(x, prev1), bld.mul(prev2, quarter));
    prev2 = prev1;
    prev1 = cur;
  }
  bld.output(prev1);
  return bld.finish();
}

/// Closed-form roots of the degree-n recursion polynomial:
/// cos((2k+1) pi / (2n)), k = 0..n-1, descending from the root nearest 1.
inline std::vector<MpReal> chebyshev_roots(int n, PrecisionLevel level) {
  std::vector<MpReal> out;
  out.reserve(n);
  MpReal pi(level);
  mpfr_const_pi(pi.raw(), MPFR_RNDN);
  for (int k = 0; k < n; ++k) {
    MpReal ang(level);
    mpfr_mul_ui(ang.raw(), pi.raw(), static_cast<unsigned long>(2 * k + 1), MPFR_RNDN);
    mpfr_div_ui(ang.raw(), ang.raw(), static_cast<unsigned long>(2 * n), MPFR_RNDN);
    MpReal c(level);
    mpfr_cos(c.raw(), ang.raw(), MPFR_RNDN);
    out.push_back(std::move(c));
  }
  return out;
}

/// The chemistry-derived system with degrees (2, 3, 2); coefficients exactly
/// as printed, including the 2e-9 constant.
inline const char* chemical_system_text() {
  return
      "variables z1, z2, z3;\n"
      "function 14*z1^2 + 6*z1*z2 + 5*z1 - 72*z2^2 - 18*z2 - 850*z3 + 0.000000002;\n"
      "function 0.5*z1*z2^2 + 0.01*z1*z2 + 0.13*z2^2 + 0.04*z2 - 40000;\n"
      "function 0.03*z1*z3 + 0.04*z3 - 850;\n";
}

inline SlpSystem chemical_system() { return parse_system(chemical_system_text()); }

namespace detail {

// Start-system factors and patches of the Griewank-Osborne homotopy, as
// printed: each factor is c1 * var + c2 * homvar over one variable group.
struct LinearFactor {
  const char* var;      // z1 or z2
  const char* re1;
  const char* im1;      // coefficient on var
  const char* re2;
  const char* im2;      // coefficient on the group variable
};

inline const std::vector<LinearFactor>& griewank_g1_factors() {
  static const std::vector<LinearFactor> f = {
      {"z2", "-0.74924187", "0.13780686", "0.18480353", "-0.41277609"},
      {"z1", "-0.75689854", "-0.14979830", "-0.85948442", "0.60841378"},
      {"z1", "0.63572306", "-0.62817501", "-0.23366512", "-0.46870314"},
      {"z1", "0.86102153", "0.27872286", "-0.29470257", "0.33646578"},
  };
  return f;
}

inline const std::vector<LinearFactor>& griewank_g2_factors() {
  static const std::vector<LinearFactor> f = {
      {"z2", "0.35642681", "0.94511728", "0.61051543", "0.76031375"},
      {"z1", "-0.84353895", "0.93981958", "0.57266034", "0.80575085"},
      {"z1", "-0.13349728", "-0.51170231", "0.42999170", "0.98290700"},
  };
  return f;
}

// patch_g: c * var + homvar + const
struct PatchLine {
  const char* var;
  const char* cre;
  const char* cim;
  const char* kre;
  const char* kim;
};

inline const std::vector<PatchLine>& griewank_patches() {
  static const std::vector<PatchLine> p = {
      {"z1", "-0.42423834", "0.84693089", "-0.71988539", "0.59651665"},
      {"z2", "0.30408917", "0.78336869", "0.35005211", "-0.52159537"},
  };
  return p;
}

inline std::string complex_coeff_expr(const char* re, const char* im) {
  return std::string("(") + re + " + (" + im + ")*I)";
}

inline std::string factor_expr(const LinearFactor& f, const char* homvar) {
  return "(" + complex_coeff_expr(f.re1, f.im1) + "*" + f.var + " + " +
         complex_coeff_expr(f.re2, f.im2) + "*" + homvar + ")";
}

}  // namespace detail

/// The Griewank-Osborne problem as a system file: two-group homogenization
/// with the published start-system factors, patches, and gamma = 1.
inline std::string griewank_system_text() {
  using namespace detail;
  std::string s;
  s += "variables z1, z2;\n";
  s += "group H1: z1;\n";
  s += "group H2: z2;\n";
  const auto& patches = griewank_patches();
  s += "patch " + complex_coeff_expr(patches[0].cre, patches[0].cim) + "*z1 + H1 + " +
       complex_coeff_expr(patches[0].kre, patches[0].kim) + ";\n";
  s += "patch " + complex_coeff_expr(patches[1].cre, patches[1].cim) + "*z2 + H2 + " +
       complex_coeff_expr(patches[1].kre, patches[1].kim) + ";\n";
  s += "function (29/16)*z1^3 - 2*z1*z2;\n";
  s += "function z2 - z1^2;\n";
  std::string g1;
  for (const auto& f : griewank_g1_factors()) {
    if (!g1.empty()) g1 += "*";
    g1 += factor_expr(f, f.var[1] == '1' ? "H1" : "H2");
  }
  std::string g2;
  for (const auto& f : griewank_g2_factors()) {
    if (!g2.empty()) g2 += "*";
    g2 += factor_expr(f, f.var[1] == '1' ? "H1" : "H2");
  }
  s += "start_function " + g1 + ";\n";
  s += "start_function " + g2 + ";\n";
  s += "gamma 1 0;\n";
  return s;
}

/// Start points of the Griewank-Osborne homotopy: one linear factor chosen
/// from each start polynomial, solved together with the two patches. Choices
/// that constrain one variable group twice are inconsistent and skipped.
inline std::vector<MpVector> griewank_start_points() {
  using namespace detail;
  const PrecisionLevel level = start_point_level();
  const auto& g1 = griewank_g1_factors();
  const auto& g2 = griewank_g2_factors();
  const auto& patches = griewank_patches();

  auto cr = [](const char* re, const char* im) {
    return ComplexRational(rational_from_literal(re), rational_from_literal(im));
  };

  std::vector<MpVector> points;
  // variable order (z1, z2, H1, H2)
  for (std::size_t i = 0; i < g1.size(); ++i) {
    for (std::size_t j = 0; j < g2.size(); ++j) {
      bool i_on_z1 = g1[i].var[1] == '1';
      bool j_on_z1 = g2[j].var[1] == '1';
      if (i_on_z1 == j_on_z1) continue;  // both factors constrain one group
      MpMatrix A(4, 4, level);
      MpVector b(4, level);
      auto set_factor_row = [&](std::size_t row, const LinearFactor& f, bool on_z1) {
        A.set(row, on_z1 ? 0 : 1, MpComplex(cr(f.re1, f.im1), level));
        A.set(row, on_z1 ? 2 : 3, MpComplex(cr(f.re2, f.im2), level));
      };
      set_factor_row(0, g1[i], i_on_z1);
      set_factor_row(1, g2[j], j_on_z1);
      for (std::size_t p = 0; p < 2; ++p) {
        A.set(2 + p, p, MpComplex(cr(patches[p].cre, patches[p].cim), level));
        A.set(2 + p, 2 + p, MpComplex(1.0, 0.0, level));
        b.set(2 + p, -MpComplex(cr(patches[p].kre, patches[p].kim), level));
      }
      SolveReport rep = solve(A, b, 16.0);
      if (rep.declared_singular) {
        throw std::runtime_error("griewank start-point system unexpectedly singular");
      }
      points.push_back(std::move(rep.solution));
    }
  }
  return points;
}

}  // namespace mptrack
