#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mptrack/containers.hpp"
#include "mptrack/rational.hpp"

namespace mptrack {

enum class SlpOp : std::uint8_t { Const, Var, TVar, Add, Sub, Mul, Neg };

/// One instruction slot. `a`/`b` index earlier slots, except Const (constant
/// table index) and Var (variable index).
struct SlpInstr {
  SlpOp op;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
};

struct VariableGroup {
  std::string hom_name;               // name of the appended homogenizing variable
  std::vector<std::uint32_t> members; // indices of the original variables in the group
};

/// Bookkeeping attached to a homogenized system: where the homogenizing
/// variables live and how many trailing equations are patches.
struct HomogenizationInfo {
  std::vector<VariableGroup> groups;
  std::vector<std::uint32_t> hom_vars;  // per group, index into the extended variable list
  std::size_t patch_count = 0;
};

/// A polynomial system (or homotopy) as a straight-line program. Acyclic by
/// construction; constants are exact rationals re-rounded at whatever
/// precision an evaluation requests, never frozen at a fixed precision.
class SlpSystem {
 public:
  SlpSystem() = default;

  const std::vector<std::string>& variables() const { return variables_; }
  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_equations() const { return outputs_.size(); }
  const std::vector<SlpInstr>& code() const { return code_; }
  const std::vector<ComplexRational>& constants() const { return constants_; }
  const std::vector<std::uint32_t>& outputs() const { return outputs_; }

  /// Per-equation total degree in the variables (t excluded); an upper bound
  /// from structural propagation, exact unless leading terms cancel.
  const std::vector<int>& degrees() const { return degrees_; }

  bool uses_t() const { return uses_t_; }

  const std::optional<HomogenizationInfo>& homogenization() const { return hom_; }
  void set_homogenization(HomogenizationInfo info) { hom_ = std::move(info); }

 private:
  friend class SlpBuilder;

  std::vector<std::string> variables_;
  std::vector<SlpInstr> code_;
  std::vector<ComplexRational> constants_;
  std::vector<std::uint32_t> outputs_;
  std::vector<int> degrees_;
  bool uses_t_ = false;
  std::optional<HomogenizationInfo> hom_;
};

/// Builds SLPs slot by slot. Powers are lowered to binary-powering chains of
/// multiplications so the per-operation error rules apply verbatim.
class SlpBuilder {
 public:
  explicit SlpBuilder(std::vector<std::string> variables)
      : variables_(std::move(variables)) {}

  std::uint32_t constant(const ComplexRational& c) {
    auto key = c.to_string();
    auto it = const_index_.find(key);
    std::uint32_t cidx;
    if (it != const_index_.end()) {
      cidx = it->second;
    } else {
      cidx = static_cast<std::uint32_t>(constants_.size());
      constants_.push_back(c);
      const_index_.emplace(std::move(key), cidx);
    }
    auto slot = const_slot_.find(cidx);
    if (slot != const_slot_.end()) return slot->second;
    std::uint32_t s = push({SlpOp::Const, cidx, 0}, 0);
    const_slot_.emplace(cidx, s);
    return s;
  }

  std::uint32_t variable(std::uint32_t index) {
    if (index >= variables_.size()) throw std::out_of_range("variable index");
    auto slot = var_slot_.find(index);
    if (slot != var_slot_.end()) return slot->second;
    std::uint32_t s = push({SlpOp::Var, index, 0}, 1);
    var_slot_.emplace(index, s);
    return s;
  }

  std::uint32_t t() {
    uses_t_ = true;
    if (t_slot_ != UINT32_MAX) return t_slot_;
    t_slot_ = push({SlpOp::TVar, 0, 0}, 0);
    return t_slot_;
  }

  std::uint32_t add(std::uint32_t a, std::uint32_t b) {
    return push({SlpOp::Add, a, b}, std::max(degree_[a], degree_[b]));
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) {
    return push({SlpOp::Sub, a, b}, std::max(degree_[a], degree_[b]));
  }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) {
    return push({SlpOp::Mul, a, b}, degree_[a] + degree_[b]);
  }
  std::uint32_t neg(std::uint32_t a) { return push({SlpOp::Neg, a, 0}, degree_[a]); }

  std::uint32_t pow(std::uint32_t base, long k) {
    if (k <= 0) throw std::invalid_argument("exponent must be a positive integer");
    // binary powering: square-and-multiply over existing slots
    std::uint32_t result = 0;
    bool have = false;
    std::uint32_t sq = base;
    while (k > 0) {
      if (k & 1) {
        result = have ? mul(result, sq) : sq;
        have = true;
      }
      k >>= 1;
      if (k > 0) sq = mul(sq, sq);
    }
    return result;
  }

  void output(std::uint32_t slot) {
    if (slot >= code_.size()) throw std::out_of_range("output slot");
    outputs_.push_back(slot);
  }

  std::size_t num_slots() const { return code_.size(); }

  /// Finish the system, dropping slots not reachable from any output.
  SlpSystem finish() {
    std::vector<bool> live(code_.size(), false);
    for (std::uint32_t out : outputs_) mark(out, live);
    std::vector<std::uint32_t> remap(code_.size(), 0);
    SlpSystem sys;
    sys.variables_ = variables_;
    sys.uses_t_ = false;
    for (std::uint32_t i = 0; i < code_.size(); ++i) {
      if (!live[i]) continue;
      SlpInstr ins = code_[i];
      if (ins.op != SlpOp::Const && ins.op != SlpOp::Var && ins.op != SlpOp::TVar) {
        ins.a = remap[ins.a];
        if (ins.op != SlpOp::Neg) ins.b = remap[ins.b];
      }
      if (ins.op == SlpOp::TVar) sys.uses_t_ = true;
      remap[i] = static_cast<std::uint32_t>(sys.code_.size());
      sys.code_.push_back(ins);
    }
    sys.constants_ = constants_;
    for (std::uint32_t out : outputs_) {
      sys.outputs_.push_back(remap[out]);
      sys.degrees_.push_back(degree_[out]);
    }
    return sys;
  }

 private:
  void mark(std::uint32_t slot, std::vector<bool>& live) {
    if (live[slot]) return;
    live[slot] = true;
    const SlpInstr& ins = code_[slot];
    if (ins.op == SlpOp::Add || ins.op == SlpOp::Sub || ins.op == SlpOp::Mul) {
      mark(ins.a, live);
      mark(ins.b, live);
    } else if (ins.op == SlpOp::Neg) {
      mark(ins.a, live);
    }
  }

  std::uint32_t push(SlpInstr ins, int degree) {
    code_.push_back(ins);
    degree_.push_back(degree);
    return static_cast<std::uint32_t>(code_.size() - 1);
  }

  std::vector<std::string> variables_;
  std::vector<SlpInstr> code_;
  std::vector<int> degree_;
  std::vector<ComplexRational> constants_;
  std::map<std::string, std::uint32_t> const_index_;
  std::map<std::uint32_t, std::uint32_t> const_slot_;
  std::map<std::uint32_t, std::uint32_t> var_slot_;
  std::uint32_t t_slot_ = UINT32_MAX;
  std::vector<std::uint32_t> outputs_;
  bool uses_t_ = false;
};

namespace detail {

/// Scalar carrying the running absolute error bounds of §-style forward error
/// accumulation: product rule max[u|ab|, Ea|b| + Eb|a|], sum rule
/// max[u|a+b|, Ea + Eb], applied per real component of each complex operation.
struct ErrValue {
  MpComplex v;
  double ar = 0, ai = 0;  // |re|, |im| as doubles
  double er = 0, ei = 0;  // absolute error bounds per component

  explicit ErrValue(PrecisionLevel level) : v(level) {}
  ErrValue(MpComplex value, double err_re, double err_im)
      : v(std::move(value)),
        ar(std::abs(v.re().to_double())),
        ai(std::abs(v.im().to_double())),
        er(err_re),
        ei(err_im) {}
};

struct ErrPolicy {
  using S = ErrValue;
  double u;  // unit roundoff of the working level

  S from_const(const ComplexRational& c, PrecisionLevel level) const {
    bool exact_re = false, exact_im = false;
    MpReal re(c.re.get_mpq_t(), level, &exact_re);
    MpReal im(c.im.get_mpq_t(), level, &exact_im);
    MpComplex v(std::move(re), std::move(im));
    double err_re = exact_re ? 0.0 : u * std::abs(v.re().to_double());
    double err_im = exact_im ? 0.0 : u * std::abs(v.im().to_double());
    return S(std::move(v), err_re, err_im);
  }

  S from_input(const MpComplex& x, PrecisionLevel level) const {
    MpComplex v = x.with_precision(level);
    double err_re = u * std::abs(v.re().to_double());
    double err_im = u * std::abs(v.im().to_double());
    return S(std::move(v), err_re, err_im);
  }

  S exact(const MpComplex& x) const { return S(x, 0.0, 0.0); }

  S add(const S& a, const S& b) const {
    MpComplex v = a.v + b.v;
    double vr = std::abs(v.re().to_double()), vi = std::abs(v.im().to_double());
    return S(std::move(v), std::max(u * vr, a.er + b.er), std::max(u * vi, a.ei + b.ei));
  }

  S sub(const S& a, const S& b) const {
    MpComplex v = a.v - b.v;
    double vr = std::abs(v.re().to_double()), vi = std::abs(v.im().to_double());
    return S(std::move(v), std::max(u * vr, a.er + b.er), std::max(u * vi, a.ei + b.ei));
  }

  S mul(const S& a, const S& b) const {
    // components expanded so each real product and sum gets its own rule
    MpReal p1 = a.v.re() * b.v.re();
    MpReal p2 = a.v.im() * b.v.im();
    MpReal p3 = a.v.re() * b.v.im();
    MpReal p4 = a.v.im() * b.v.re();
    double e1 = std::max(u * std::abs(p1.to_double()), a.er * b.ar + b.er * a.ar);
    double e2 = std::max(u * std::abs(p2.to_double()), a.ei * b.ai + b.ei * a.ai);
    double e3 = std::max(u * std::abs(p3.to_double()), a.er * b.ai + b.ei * a.ar);
    double e4 = std::max(u * std::abs(p4.to_double()), a.ei * b.ar + b.er * a.ai);
    MpComplex v(p1 - p2, p3 + p4);
    double vr = std::abs(v.re().to_double()), vi = std::abs(v.im().to_double());
    return S(std::move(v), std::max(u * vr, e1 + e2), std::max(u * vi, e3 + e4));
  }

  S neg(const S& a) const { return S(-a.v, a.er, a.ei); }

  static const MpComplex& value(const S& s) { return s.v; }
  static double error(const S& s) { return std::hypot(s.er, s.ei); }
};

struct PlainPolicy {
  using S = MpComplex;

  S from_const(const ComplexRational& c, PrecisionLevel level) const {
    return MpComplex(c, level);
  }
  S from_input(const MpComplex& x, PrecisionLevel level) const {
    return x.with_precision(level);
  }
  S exact(const MpComplex& x) const { return x; }
  S add(const S& a, const S& b) const { return a + b; }
  S sub(const S& a, const S& b) const { return a - b; }
  S mul(const S& a, const S& b) const { return a * b; }
  S neg(const S& a) const { return -a; }
  static const MpComplex& value(const S& s) { return s; }
  static double error(const S&) { return 0.0; }
};

/// Core interpreter. With derivatives, every slot carries forward-mode partials
/// with respect to each variable plus t.
template <class Policy, bool WithDerivs>
struct SlpRun {
  using S = typename Policy::S;

  struct Slot {
    S val;
    std::vector<S> der;  // n + 1 entries when WithDerivs
    explicit Slot(S v) : val(std::move(v)) {}
  };

  static void run(const Policy& pol, const SlpSystem& sys, const MpVector& z,
                  const MpComplex& t, PrecisionLevel level, std::vector<Slot>& slots) {
    if (z.size() != sys.num_variables()) {
      throw std::invalid_argument("point dimension != variable count");
    }
    const std::size_t nd = sys.num_variables() + 1;
    const MpComplex zero_c(level);
    const MpComplex one_c(1.0, 0.0, level);
    slots.clear();
    slots.reserve(sys.code().size());
    for (const SlpInstr& ins : sys.code()) {
      switch (ins.op) {
        case SlpOp::Const: {
          Slot s(pol.from_const(sys.constants()[ins.a], level));
          if constexpr (WithDerivs) s.der.assign(nd, pol.exact(zero_c));
          slots.push_back(std::move(s));
          break;
        }
        case SlpOp::Var: {
          Slot s(pol.from_input(z[ins.a], level));
          if constexpr (WithDerivs) {
            s.der.assign(nd, pol.exact(zero_c));
            s.der[ins.a] = pol.exact(one_c);
          }
          slots.push_back(std::move(s));
          break;
        }
        case SlpOp::TVar: {
          Slot s(pol.from_input(t, level));
          if constexpr (WithDerivs) {
            s.der.assign(nd, pol.exact(zero_c));
            s.der[nd - 1] = pol.exact(one_c);
          }
          slots.push_back(std::move(s));
          break;
        }
        case SlpOp::Add:
        case SlpOp::Sub: {
          const Slot& a = slots[ins.a];
          const Slot& b = slots[ins.b];
          bool is_add = ins.op == SlpOp::Add;
          Slot s(is_add ? pol.add(a.val, b.val) : pol.sub(a.val, b.val));
          if constexpr (WithDerivs) {
            s.der.reserve(nd);
            for (std::size_t k = 0; k < nd; ++k) {
              s.der.push_back(is_add ? pol.add(a.der[k], b.der[k])
                                     : pol.sub(a.der[k], b.der[k]));
            }
          }
          slots.push_back(std::move(s));
          break;
        }
        case SlpOp::Mul: {
          const Slot& a = slots[ins.a];
          const Slot& b = slots[ins.b];
          Slot s(pol.mul(a.val, b.val));
          if constexpr (WithDerivs) {
            s.der.reserve(nd);
            for (std::size_t k = 0; k < nd; ++k) {
              s.der.push_back(
                  pol.add(pol.mul(a.val, b.der[k]), pol.mul(b.val, a.der[k])));
            }
          }
          slots.push_back(std::move(s));
          break;
        }
        case SlpOp::Neg: {
          const Slot& a = slots[ins.a];
          Slot s(pol.neg(a.val));
          if constexpr (WithDerivs) {
            s.der.reserve(nd);
            for (std::size_t k = 0; k < nd; ++k) s.der.push_back(pol.neg(a.der[k]));
          }
          slots.push_back(std::move(s));
          break;
        }
      }
    }
  }
};

}  // namespace detail

/// Evaluate all outputs at `z`, `t`, instruction by instruction at `level`.
/// With `psi_out`, also accumulates the running error bound per instruction and
/// reports the max over outputs.
inline MpVector evaluate(const SlpSystem& sys, const MpVector& z, const MpComplex& t,
                         PrecisionLevel level, double* psi_out = nullptr) {
  MpVector out(sys.num_equations(), level);
  if (psi_out == nullptr) {
    detail::PlainPolicy pol;
    std::vector<detail::SlpRun<detail::PlainPolicy, false>::Slot> slots;
    detail::SlpRun<detail::PlainPolicy, false>::run(pol, sys, z, t, level, slots);
    for (std::size_t i = 0; i < sys.num_equations(); ++i) {
      out.set(i, slots[sys.outputs()[i]].val);
    }
  } else {
    detail::ErrPolicy pol{level.unit_roundoff()};
    std::vector<detail::SlpRun<detail::ErrPolicy, false>::Slot> slots;
    detail::SlpRun<detail::ErrPolicy, false>::run(pol, sys, z, t, level, slots);
    double psi = 0;
    for (std::size_t i = 0; i < sys.num_equations(); ++i) {
      const auto& s = slots[sys.outputs()[i]];
      out.set(i, s.val.v);
      psi = std::max(psi, detail::ErrPolicy::error(s.val));
    }
    *psi_out = psi;
  }
  return out;
}

/// Running §-rule error bound of one evaluation at `level` (the ψ of the error
/// model, as an absolute bound on the output max-norm).
inline double accumulate_error(const SlpSystem& sys, const MpVector& z, const MpComplex& t,
                               PrecisionLevel level) {
  double psi = 0;
  evaluate(sys, z, t, level, &psi);
  return psi;
}

struct SlpJacobian {
  MpVector value;  // H(z, t)
  MpMatrix dz;     // dH/dz, one row per equation
  MpVector dt;     // dH/dt
  double psi = 0;  // evaluation error bound (only when requested)
  double phi = 0;  // max Jacobian-entry error bound (only when requested)
};

/// Forward-mode differentiation through the SLP: value, dH/dz and dH/dt in one
/// pass. With `with_error`, error bounds accumulate through the derivative
/// computation as well, giving per-point psi/phi.
inline SlpJacobian jacobian(const SlpSystem& sys, const MpVector& z, const MpComplex& t,
                            PrecisionLevel level, bool with_error = false) {
  const std::size_t m = sys.num_equations();
  const std::size_t n = sys.num_variables();
  SlpJacobian jac;
  jac.value = MpVector(m, level);
  jac.dz = MpMatrix(m, n, level);
  jac.dt = MpVector(m, level);

  auto fill = [&](const auto& slots, auto value_of, auto error_of) {
    double psi = 0, phi = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& s = slots[sys.outputs()[i]];
      jac.value.set(i, value_of(s.val));
      psi = std::max(psi, error_of(s.val));
      for (std::size_t k = 0; k < n; ++k) {
        jac.dz.set(i, k, value_of(s.der[k]));
        phi = std::max(phi, error_of(s.der[k]));
      }
      jac.dt.set(i, value_of(s.der[n]));
    }
    jac.psi = psi;
    jac.phi = phi;
  };

  if (with_error) {
    detail::ErrPolicy pol{level.unit_roundoff()};
    std::vector<detail::SlpRun<detail::ErrPolicy, true>::Slot> slots;
    detail::SlpRun<detail::ErrPolicy, true>::run(pol, sys, z, t, level, slots);
    fill(
        slots, [](const detail::ErrValue& s) -> const MpComplex& { return s.v; },
        [](const detail::ErrValue& s) { return detail::ErrPolicy::error(s); });
  } else {
    detail::PlainPolicy pol;
    std::vector<detail::SlpRun<detail::PlainPolicy, true>::Slot> slots;
    detail::SlpRun<detail::PlainPolicy, true>::run(pol, sys, z, t, level, slots);
    fill(
        slots, [](const MpComplex& s) -> const MpComplex& { return s; },
        [](const MpComplex&) { return 0.0; });
  }
  return jac;
}

}  // namespace mptrack
