#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mptrack/slp.hpp"

namespace mptrack {

/// Sparse multivariate polynomial with exact coefficients. Exponent vectors
/// run over the system variables plus one trailing slot for t.
using SparsePoly = std::map<std::vector<std::uint16_t>, ComplexRational>;

namespace detail {

inline void poly_accumulate(SparsePoly& dst, const std::vector<std::uint16_t>& key,
                            const ComplexRational& c) {
  auto it = dst.find(key);
  if (it == dst.end()) {
    if (!c.is_zero()) dst.emplace(key, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) dst.erase(it);
}

inline SparsePoly poly_mul(const SparsePoly& a, const SparsePoly& b, std::size_t term_limit) {
  SparsePoly r;
  for (const auto& [ka, ca] : a) {
    for (const auto& [kb, cb] : b) {
      std::vector<std::uint16_t> k(ka.size());
      for (std::size_t i = 0; i < k.size(); ++i) {
        k[i] = static_cast<std::uint16_t>(ka[i] + kb[i]);
      }
      poly_accumulate(r, k, ca * cb);
      if (r.size() > term_limit) {
        throw std::runtime_error("monomial expansion too large; supply explicit error bounds");
      }
    }
  }
  return r;
}

}  // namespace detail

/// Expand every equation into monomial form (exact arithmetic). Intended for
/// the modest systems this library targets; guarded against blowup.
inline std::vector<SparsePoly> expand_to_monomials(const SlpSystem& sys,
                                                   std::size_t term_limit = 1u << 18) {
  const std::size_t width = sys.num_variables() + 1;  // + t
  std::vector<SparsePoly> slots;
  slots.reserve(sys.code().size());
  for (const SlpInstr& ins : sys.code()) {
    SparsePoly p;
    switch (ins.op) {
      case SlpOp::Const:
        detail::poly_accumulate(p, std::vector<std::uint16_t>(width, 0),
                                sys.constants()[ins.a]);
        break;
      case SlpOp::Var: {
        std::vector<std::uint16_t> k(width, 0);
        k[ins.a] = 1;
        detail::poly_accumulate(p, k, ComplexRational(1, 0));
        break;
      }
      case SlpOp::TVar: {
        std::vector<std::uint16_t> k(width, 0);
        k[width - 1] = 1;
        detail::poly_accumulate(p, k, ComplexRational(1, 0));
        break;
      }
      case SlpOp::Add:
        p = slots[ins.a];
        for (const auto& [k, c] : slots[ins.b]) detail::poly_accumulate(p, k, c);
        break;
      case SlpOp::Sub:
        p = slots[ins.a];
        for (const auto& [k, c] : slots[ins.b]) detail::poly_accumulate(p, k, -c);
        break;
      case SlpOp::Mul:
        p = detail::poly_mul(slots[ins.a], slots[ins.b], term_limit);
        break;
      case SlpOp::Neg:
        for (const auto& [k, c] : slots[ins.a]) p.emplace(k, -c);
        break;
    }
    if (p.size() > term_limit) {
      throw std::runtime_error("monomial expansion too large; supply explicit error bounds");
    }
    slots.push_back(std::move(p));
  }
  std::vector<SparsePoly> out;
  out.reserve(sys.num_equations());
  for (std::uint32_t o : sys.outputs()) out.push_back(slots[o]);
  return out;
}

/// The scalar bounds feeding the precision rules: function-evaluation error
/// <= Psi * u and Jacobian-evaluation error <= Phi * u.
struct CoeffBounds {
  enum class Source { coeff_formula, slp_accumulated, user_supplied };
  double Psi = 0;
  double Phi = 0;
  Source source = Source::coeff_formula;
};

/// Psi = max over equations of D * sum|c_i|, Phi likewise with D(D-1).
/// D is the equation degree: for homogenized systems the largest per-group
/// degree (the degree of the underlying affine equation), else total degree.
inline CoeffBounds coeff_bounds(const SlpSystem& sys) {
  std::vector<SparsePoly> eqs = expand_to_monomials(sys);
  const std::size_t n = sys.num_variables();
  CoeffBounds b;
  b.source = CoeffBounds::Source::coeff_formula;
  for (const SparsePoly& eq : eqs) {
    double coeff_sum = 0;
    long d = 0;
    for (const auto& [k, c] : eq) {
      coeff_sum += c.abs_approx();
      if (sys.homogenization().has_value()) {
        const auto& hom = *sys.homogenization();
        for (std::size_t g = 0; g < hom.groups.size(); ++g) {
          long dg = k[hom.hom_vars[g]];
          for (std::uint32_t m : hom.groups[g].members) dg += k[m];
          d = std::max(d, dg);
        }
      } else {
        long total = 0;
        for (std::size_t i = 0; i < n; ++i) total += k[i];
        d = std::max(d, total);
      }
    }
    double dd = static_cast<double>(d);
    b.Psi = std::max(b.Psi, dd * coeff_sum);
    b.Phi = std::max(b.Phi, dd * (dd - 1) * coeff_sum);
  }
  return b;
}

namespace detail {

/// Rebuild an SLP equation from monomial form: sum of coefficient-times-power
/// products, powers lowered by the builder.
inline std::uint32_t emit_monomials(SlpBuilder& bld, const SparsePoly& poly,
                                    std::size_t width) {
  bool have = false;
  std::uint32_t acc = 0;
  for (const auto& [k, c] : poly) {
    std::uint32_t term;
    bool have_factor = false;
    std::uint32_t factor = 0;
    for (std::size_t v = 0; v + 1 < width; ++v) {
      if (k[v] == 0) continue;
      std::uint32_t p = bld.pow(bld.variable(static_cast<std::uint32_t>(v)), k[v]);
      factor = have_factor ? bld.mul(factor, p) : p;
      have_factor = true;
    }
    if (k[width - 1] > 0) {
      std::uint32_t p = bld.pow(bld.t(), k[width - 1]);
      factor = have_factor ? bld.mul(factor, p) : p;
      have_factor = true;
    }
    if (!have_factor) {
      term = bld.constant(c);
    } else if (c == ComplexRational(1, 0)) {
      term = factor;
    } else if (c == ComplexRational(-1, 0)) {
      term = bld.neg(factor);
    } else {
      term = bld.mul(bld.constant(c), factor);
    }
    acc = have ? bld.add(acc, term) : term;
    have = true;
  }
  if (!have) acc = bld.constant(ComplexRational(0, 0));
  return acc;
}

}  // namespace detail

/// Lift each equation to be homogeneous in every variable group (one appended
/// homogenizing variable per group) and append the patch equations. Setting
/// the homogenizing variables to 1 recovers the original equations.
///
/// `patches` must be over the extended variable list (original variables
/// followed by the group variables, in group order), one affine-linear
/// equation per group.
inline SlpSystem homogenize(const SlpSystem& sys, const std::vector<VariableGroup>& groups,
                            const SlpSystem& patches) {
  if (sys.uses_t()) throw std::invalid_argument("cannot homogenize a t-dependent system");
  if (patches.num_equations() != groups.size()) {
    throw std::invalid_argument("patch count != group count");
  }
  const std::size_t n = sys.num_variables();

  std::vector<int> group_of(n, -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::uint32_t m : groups[g].members) {
      if (m >= n || group_of[m] != -1) {
        throw std::invalid_argument("groups must partition the variables");
      }
      group_of[m] = static_cast<int>(g);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (group_of[i] == -1) throw std::invalid_argument("groups must partition the variables");
  }

  std::vector<std::string> ext_vars = sys.variables();
  for (const auto& g : groups) ext_vars.push_back(g.hom_name);
  if (patches.variables() != ext_vars) {
    throw std::invalid_argument("patches must be over the homogenized variable list");
  }

  std::vector<SparsePoly> eqs = expand_to_monomials(sys);
  const std::size_t ext_width = ext_vars.size() + 1;

  SlpBuilder bld(ext_vars);
  for (const SparsePoly& eq : eqs) {
    // per-group degree of the equation
    std::vector<long> gdeg(groups.size(), 0);
    for (const auto& [k, c] : eq) {
      std::vector<long> mdeg(groups.size(), 0);
      for (std::size_t v = 0; v < n; ++v) mdeg[group_of[v]] += k[v];
      for (std::size_t g = 0; g < groups.size(); ++g) gdeg[g] = std::max(gdeg[g], mdeg[g]);
    }
    SparsePoly lifted;
    for (const auto& [k, c] : eq) {
      std::vector<std::uint16_t> key(ext_width, 0);
      std::vector<long> mdeg(groups.size(), 0);
      for (std::size_t v = 0; v < n; ++v) {
        key[v] = k[v];
        mdeg[group_of[v]] += k[v];
      }
      for (std::size_t g = 0; g < groups.size(); ++g) {
        key[n + g] = static_cast<std::uint16_t>(gdeg[g] - mdeg[g]);
      }
      key[ext_width - 1] = k[n];  // t power (always 0 here)
      lifted.emplace(std::move(key), c);
    }
    bld.output(detail::emit_monomials(bld, lifted, ext_width));
  }

  // patch equations appended verbatim
  std::vector<SparsePoly> patch_eqs = expand_to_monomials(patches);
  for (const SparsePoly& p : patch_eqs) {
    long deg = 0;
    for (const auto& [k, c] : p) {
      deg = std::max(deg, std::accumulate(k.begin(), k.end() - 1, 0L));
    }
    if (deg > 1) throw std::invalid_argument("patch equations must be affine linear");
    bld.output(detail::emit_monomials(bld, p, ext_width));
  }

  SlpSystem out = bld.finish();
  HomogenizationInfo info;
  info.groups = groups;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    info.hom_vars.push_back(static_cast<std::uint32_t>(n + g));
  }
  info.patch_count = groups.size();
  out.set_homogenization(std::move(info));
  return out;
}

/// Original-variable coordinates of a homogenized point: z_i / H_{group(i)}.
/// For systems without homogenization this is the identity.
inline MpVector affine_coordinates(const SlpSystem& sys, const MpVector& x) {
  if (!sys.homogenization().has_value()) return x;
  const auto& hom = *sys.homogenization();
  std::size_t n = sys.num_variables() - hom.groups.size();
  MpVector z(n, x.level());
  for (std::size_t g = 0; g < hom.groups.size(); ++g) {
    const MpComplex& h = x[hom.hom_vars[g]];
    for (std::uint32_t m : hom.groups[g].members) {
      z.set(m, h.is_zero() ? MpComplex(std::numeric_limits<double>::infinity(), 0.0, x.level())
                           : x[m] / h);
    }
  }
  return z;
}

/// Max-norm of the affine coordinates (+inf if a homogenizing coordinate is
/// exactly zero).
inline double affine_norm(const SlpSystem& sys, const MpVector& x) {
  if (!sys.homogenization().has_value()) return max_norm(x);
  return max_norm(affine_coordinates(sys, x));
}

}  // namespace mptrack
