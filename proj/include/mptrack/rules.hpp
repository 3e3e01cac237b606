#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include "mptrack/precision.hpp"

namespace mptrack {

/// The error-model quantities feeding the precision rules.
struct ErrorModel {
  double Psi = 0;      // function-evaluation error bound: psi = Psi * u
  double Phi = 0;      // Jacobian-evaluation error bound: phi = Phi * u
  double eps_E = 1;    // linear-solve growth factor, default n^2
  int sigma1 = 0;      // safety digits for rules A and B
  int sigma2 = 0;      // safety digits for rule C
  double tau = 8;      // tracking tolerance exponent: success when |d| < 10^-tau
  int N = 2;           // corrector iterations allowed per step
};

/// Point-local quantities the rules consume.
struct RuleInputs {
  double J_norm = 0;
  double Jinv_norm = 0;
  double v_norm = 0;
  std::optional<double> d_norm;  // latest Newton step size, inside the corrector
  int iteration = 0;             // corrector iterations already used
};

/// Digits so the error-perturbed Jacobian stays safely nonsingular:
/// P > sigma1 + log10(|J^-1| eps_E (|J| + Phi)).
inline double rule_A_digits(const ErrorModel& m, const RuleInputs& in) {
  return m.sigma1 + std::log10(in.Jinv_norm * m.eps_E * (in.J_norm + m.Phi));
}

/// Digits so the corrector can still reach 10^-tau in the remaining N - i
/// iterations: P > sigma1 + log10(|J^-1|(2+eps_E)(|J|+Phi) + 1)
///                 + (tau + log10 |d|) / (N - i).
inline double rule_B_digits(const ErrorModel& m, const RuleInputs& in) {
  if (!in.d_norm.has_value()) throw std::invalid_argument("rule B requires a step size");
  if (in.iteration >= m.N) throw std::invalid_argument("rule B requires iterations remaining");
  double base = m.sigma1 + std::log10(in.Jinv_norm * (2.0 + m.eps_E) * (in.J_norm + m.Phi) + 1.0);
  return base + (m.tau + std::log10(*in.d_norm)) / static_cast<double>(m.N - in.iteration);
}

/// Digits so the converged corrector lands within the tolerance:
/// P > sigma2 + tau + log10(|J^-1| Psi + |v|).
inline double rule_C_digits(const ErrorModel& m, const RuleInputs& in) {
  return m.sigma2 + m.tau + std::log10(in.Jinv_norm * m.Psi + in.v_norm);
}

/// Split-precision variant: same-precision requirement P for the corrector
/// arithmetic and a higher requirement P' for residual evaluation.
inline std::pair<double, double> rule_Cprime_digits(const ErrorModel& m, const RuleInputs& in) {
  double p = m.sigma2 + m.tau + std::log10(in.v_norm);
  double pp = m.sigma2 + m.tau + std::log10(in.Jinv_norm) + std::log10(m.Psi);
  return {p, pp};
}

enum class RuleContext { outside_corrector, inside_corrector };

/// Smallest lattice level whose decimal digits strictly exceed every
/// applicable rule (A and C outside the corrector, B and C inside), or nullopt
/// when no level within `max_bits` qualifies.
inline std::optional<PrecisionLevel> required_level(const ErrorModel& m, const RuleInputs& in,
                                                    RuleContext ctx,
                                                    int max_bits = PrecisionLevel::kDefaultMaxBits) {
  double need = rule_C_digits(m, in);
  if (ctx == RuleContext::inside_corrector) {
    need = std::max(need, rule_B_digits(m, in));
  } else {
    need = std::max(need, rule_A_digits(m, in));
  }
  if (std::isnan(need)) return std::nullopt;
  return PrecisionLevel::for_digits(need, max_bits);
}

}  // namespace mptrack
