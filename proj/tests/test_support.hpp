#pragma once

// Shared helpers for unit and acceptance tests: random polynomial systems,
// random points, and a central-difference Jacobian oracle kept independent of
// the forward-mode implementation it checks.

#include <string>
#include <vector>

#include "mptrack/rng.hpp"
#include "mptrack/slp.hpp"

namespace mptest {

using namespace mptrack;

inline std::vector<std::string> var_names(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("z" + std::to_string(i + 1));
  return v;
}

/// Random polynomial system: each equation a sum of random monomials with
/// small rational coefficients; optionally t-dependent.
inline SlpSystem random_system(Rng& rng, std::size_t n_vars, std::size_t n_eqs, int max_degree,
                               int terms_per_eq, bool with_t = false) {
  SlpBuilder bld(var_names(n_vars));
  for (std::size_t e = 0; e < n_eqs; ++e) {
    std::uint32_t acc = 0;
    bool have = false;
    for (int term = 0; term < terms_per_eq; ++term) {
      long num = static_cast<long>(rng.next_u64() % 41) - 20;
      if (num == 0) num = 7;
      long den = 1 + static_cast<long>(rng.next_u64() % 16);
      mpq_class q(num, den);
      q.canonicalize();
      std::uint32_t cur = bld.constant(ComplexRational(q, mpq_class(0)));
      int remaining = max_degree;
      for (std::size_t v = 0; v < n_vars; ++v) {
        int k = static_cast<int>(rng.next_u64() % (remaining + 1));
        remaining -= k;
        if (k > 0) cur = bld.mul(cur, bld.pow(bld.variable(static_cast<std::uint32_t>(v)), k));
      }
      if (with_t && (rng.next_u64() & 1)) cur = bld.mul(cur, bld.t());
      acc = have ? bld.add(acc, cur) : cur;
      have = true;
    }
    bld.output(acc);
  }
  return bld.finish();
}

inline MpVector random_point(Rng& rng, std::size_t n, PrecisionLevel level, double scale = 2.0) {
  MpVector z(n, level);
  for (std::size_t i = 0; i < n; ++i) {
    z.set(i, MpComplex(rng.next_unit() * scale - scale / 2, rng.next_unit() * scale - scale / 2,
                       level));
  }
  return z;
}

/// Central finite differences at `level` with a real step h: the oracle for
/// forward-mode derivatives. Valid for polynomials via the real direction.
struct FdJacobian {
  MpMatrix dz;
  MpVector dt;
};

inline FdJacobian fd_jacobian(const SlpSystem& sys, const MpVector& z, const MpComplex& t,
                              PrecisionLevel level, int log2_h = -40) {
  const std::size_t m = sys.num_equations();
  const std::size_t n = sys.num_variables();
  FdJacobian out;
  out.dz = MpMatrix(m, n, level);
  out.dt = MpVector(m, level);
  MpReal h(std::ldexp(1.0, log2_h), level);
  MpComplex hc(h, MpReal(level));
  MpComplex two_h = hc + hc;

  MpVector zp = z.with_precision(level);
  for (std::size_t v = 0; v < n; ++v) {
    MpVector plus = zp, minus = zp;
    plus.set(v, zp[v] + hc);
    minus.set(v, zp[v] - hc);
    MpVector fp = evaluate(sys, plus, t, level);
    MpVector fm = evaluate(sys, minus, t, level);
    for (std::size_t e = 0; e < m; ++e) out.dz.set(e, v, (fp[e] - fm[e]) / two_h);
  }
  MpVector fp = evaluate(sys, zp, t + hc, level);
  MpVector fm = evaluate(sys, zp, t - hc, level);
  for (std::size_t e = 0; e < m; ++e) out.dt.set(e, (fp[e] - fm[e]) / two_h);
  return out;
}

}  // namespace mptest
