#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mptrack/homotopy.hpp"
#include "mptrack/linalg.hpp"
#include "mptrack/poly.hpp"
#include "mptrack/rng.hpp"
#include "mptrack/rules.hpp"
#include "mptrack/slp.hpp"

namespace mptrack {

/// Tracking tolerance schedule: tau(t) is the value attached to the smallest
/// threshold >= t (thresholds strictly decreasing). A single entry {1, tau}
/// gives a constant tolerance.
struct TauSchedule {
  std::vector<std::pair<double, double>> entries{{1.0, 8.0}};

  double at(double t) const {
    double tau = entries.front().second;
    for (const auto& [threshold, value] : entries) {
      if (threshold >= t) tau = value;
    }
    return tau;
  }

  void validate() const {
    if (entries.empty()) throw std::invalid_argument("tau schedule must be nonempty");
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].first >= entries[i - 1].first) {
        throw std::invalid_argument("tau schedule thresholds must strictly decrease");
      }
    }
    for (const auto& [threshold, value] : entries) {
      if (value <= 0) throw std::invalid_argument("tau must be positive");
    }
  }
};

enum class TrackMode { adaptive, fixed, rerun };
enum class StopMode { prediction_agreement, reach_t_end };

struct TrackerConfig {
  double s_init = 0.1;
  double s_min = 1e-14;
  double a = 0.5;   // step adjustment factor in (0,1)
  int M = 5;        // consecutive successes before expanding the step
  int N = 2;        // corrector iterations per step
  TauSchedule tau;
  long max_steps = 50000;
  double t_end = 0.0;
  StopMode stop_mode = StopMode::prediction_agreement;
  TrackMode mode = TrackMode::adaptive;
  int fixed_bits = PrecisionLevel::kDoubleBits;
  std::vector<int> ladder{52, 64, 96, 128, 256};
  int precision_cap = PrecisionLevel::kDefaultMaxBits;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(a > 0 && a < 1)) throw std::invalid_argument("step factor a must be in (0,1)");
    if (s_min > s_init) throw std::invalid_argument("s_min must not exceed s_init");
    if (M < 1 || N < 1) throw std::invalid_argument("M and N must be >= 1");
    if (t_end < 0) throw std::invalid_argument("t_end must be >= 0");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    tau.validate();
    PrecisionLevel::from_bits(fixed_bits);
    for (int b : ladder) PrecisionLevel::from_bits(b);
  }
};

enum class PathStatus { Success, FailedMinStep, FailedMaxSteps, FailedPrecisionLimit };

inline const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::Success: return "Success";
    case PathStatus::FailedMinStep: return "FailedMinStep";
    case PathStatus::FailedMaxSteps: return "FailedMaxSteps";
    case PathStatus::FailedPrecisionLimit: return "FailedPrecisionLimit";
  }
  return "?";
}

/// One row per attempted step.
struct TelemetryRecord {
  long step = 0;
  double t = 0;
  double s = 0;
  int bits = PrecisionLevel::kDoubleBits;
  double J_norm = 0;
  double Jinv_norm_est = 0;
  double cond_est = 0;
  double ruleA = 0;
  std::optional<double> ruleB;
  double ruleC = 0;
  int corrector_iterations = 0;
  double d_norm_final = std::numeric_limits<double>::quiet_NaN();
  bool accepted = false;
  double z_norm = 0;  // affine max-norm of the point (not part of the CSV contract)
};

struct PathResult {
  PathStatus status = PathStatus::FailedMinStep;
  MpVector endpoint;
  double t_reached = 1.0;
  std::vector<TelemetryRecord> telemetry;
  int max_bits_used = PrecisionLevel::kDoubleBits;
  long accepted_steps = 0;
  std::string diagnostic;
};

/// Euler predictor: solve [dH/dz] dz = -(H + dH/dt * (-dt)) and step to
/// z + dz; t decreases by dt. `dt = t` extrapolates to t = 0.
struct PredictResult {
  bool singular = false;
  MpVector z;
};

inline PredictResult euler_predict(const SlpSystem& form, const MpVector& z, double t,
                                   double dt, PrecisionLevel level, double eps_E) {
  SlpJacobian jac = jacobian(form, z.with_precision(level), MpComplex(t, 0.0, level), level);
  MpVector rhs(form.num_equations(), level);
  MpComplex dtc(dt, 0.0, level);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs.set(i, jac.dt[i] * dtc - jac.value[i]);
  }
  SolveReport rep = solve(jac.dz, rhs, eps_E);
  PredictResult out;
  if (rep.declared_singular) {
    out.singular = true;
    return out;
  }
  out.z = z.with_precision(level) + rep.solution;
  return out;
}

/// Newton corrector at fixed t. Between iterations, rules B and C are checked
/// and precision may rise mid-correction (adaptive modes only).
struct CorrectorResult {
  enum class Kind { Converged, NotConverged, Singular, PrecisionLimit } kind =
      Kind::NotConverged;
  MpVector z;
  double d_norm = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  PrecisionLevel level;
  std::optional<double> ruleB;
  double ruleC = std::numeric_limits<double>::quiet_NaN();
};

inline CorrectorResult newton_correct(const SlpSystem& form, const MpVector& z0, double t,
                                      PrecisionLevel level, const ErrorModel& m, double J_norm,
                                      double Jinv_norm, bool adaptive, int precision_cap) {
  CorrectorResult res;
  res.level = level;
  res.z = z0.with_precision(level);
  const double tol = std::pow(10.0, -m.tau);

  for (int i = 1; i <= m.N; ++i) {
    MpComplex tc(t, 0.0, res.level);
    SlpJacobian jac = jacobian(form, res.z, tc, res.level);
    MpVector rhs(form.num_equations(), res.level);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs.set(k, -jac.value[k]);
    SolveReport rep = solve(jac.dz, rhs, m.eps_E);
    if (rep.declared_singular) {
      res.kind = CorrectorResult::Kind::Singular;
      res.iterations = i - 1;
      return res;
    }
    res.z = res.z + rep.solution;
    res.d_norm = max_norm(rep.solution);
    res.iterations = i;

    RuleInputs in;
    in.J_norm = J_norm;
    in.Jinv_norm = Jinv_norm;
    in.v_norm = max_norm(res.z);
    in.d_norm = res.d_norm;
    in.iteration = i;
    res.ruleC = rule_C_digits(m, in);

    if (res.d_norm < tol) {
      res.kind = CorrectorResult::Kind::Converged;
      return res;
    }
    if (i < m.N) {
      res.ruleB = rule_B_digits(m, in);
      if (adaptive) {
        auto req = required_level(m, in, RuleContext::inside_corrector, precision_cap);
        if (!req.has_value()) {
          res.kind = CorrectorResult::Kind::PrecisionLimit;
          return res;
        }
        if (*req > res.level) {
          res.level = *req;
          res.z = res.z.with_precision(res.level);
        }
      }
    }
  }
  res.kind = CorrectorResult::Kind::NotConverged;
  return res;
}

/// The predictor/corrector loop of the stepwise adaptive-precision tracker
/// (or its fixed-precision reduction used by the re-run strategy).
class PathTracker {
 public:
  PathTracker(const Homotopy& h, ErrorModel model, TrackerConfig cfg,
              CoeffBounds::Source bounds_source = CoeffBounds::Source::coeff_formula)
      : h_(h),
        base_model_(model),
        cfg_(std::move(cfg)),
        bounds_source_(bounds_source),
        rng_(cfg_.seed) {
    cfg_.validate();
  }

  PathResult track(const MpVector& z_start) {
    if (cfg_.mode == TrackMode::rerun) return track_rerun(z_start);
    return track_single(z_start, 1.0,
                        cfg_.mode == TrackMode::adaptive
                            ? PrecisionLevel()
                            : PrecisionLevel::from_bits(cfg_.fixed_bits),
                        cfg_.mode == TrackMode::adaptive);
  }

  /// Figure-1 style re-runs: fixed-precision tracking up the bit ladder,
  /// restarting each rerun from the last successful path point.
  PathResult track_rerun(const MpVector& z_start) {
    MpVector z = z_start;
    double t0 = 1.0;
    PathResult combined;
    for (std::size_t rung = 0; rung < cfg_.ladder.size(); ++rung) {
      PathResult r =
          track_single(z, t0, PrecisionLevel::from_bits(cfg_.ladder[rung]), false);
      long base = combined.telemetry.empty() ? 0 : combined.telemetry.back().step;
      for (TelemetryRecord rec : r.telemetry) {
        rec.step += base;
        combined.telemetry.push_back(rec);
      }
      combined.accepted_steps += r.accepted_steps;
      combined.max_bits_used = std::max(combined.max_bits_used, r.max_bits_used);
      combined.status = r.status;
      combined.endpoint = r.endpoint;
      combined.t_reached = r.t_reached;
      combined.diagnostic = r.diagnostic;
      if (r.status == PathStatus::Success) return combined;
      if (r.endpoint.size() > 0 && r.t_reached < t0) {
        z = r.endpoint;  // resume from the last successful path point
        t0 = r.t_reached;
      }
    }
    combined.diagnostic = "precision ladder exhausted; " + combined.diagnostic;
    return combined;
  }

 private:
  struct Norms {
    double J = 0;
    double Jinv = 0;
    double cond = 0;
  };

  PathResult track_single(const MpVector& z_start, double t_start, PrecisionLevel level0,
                          bool adaptive) {
    PathResult res;
    PrecisionLevel level = level0;
    MpVector z = z_start.with_precision(level);
    double t = t_start;
    double s = cfg_.s_init;
    int successes = 0;
    int predictor_raises = 0;
    long attempts = 0;
    std::optional<MpVector> last_pred;
    double last_pred_t = 0;
    ErrorModel model = base_model_;

    auto fail = [&](PathStatus st, const std::string& why) {
      res.status = st;
      res.endpoint = z;
      res.t_reached = t;
      res.diagnostic = why;
      return res;
    };

    auto note_bits = [&]() { res.max_bits_used = std::max(res.max_bits_used, level.bits()); };

    Norms norms;
    auto refresh = [&]() -> bool {
      // one estimation solve per accepted step; estimates are reused by every
      // rule check until the next acceptance
      while (true) {
        SlpJacobian jac =
            jacobian(h_.form, z, MpComplex(t, 0.0, level), level,
                     bounds_source_ == CoeffBounds::Source::slp_accumulated);
        norms.J = max_norm(jac.dz);
        auto inv = inv_norm_estimate(jac.dz, rng_, model.eps_E);
        if (inv.has_value()) {
          norms.Jinv = *inv;
          norms.cond = norms.J * *inv;
          if (bounds_source_ == CoeffBounds::Source::slp_accumulated) {
            double u = level.unit_roundoff();
            model.Psi = jac.psi / u;
            model.Phi = jac.phi / u;
          }
          return true;
        }
        if (!adaptive) {
          norms.Jinv = std::numeric_limits<double>::infinity();
          norms.cond = norms.Jinv;
          return true;
        }
        if (level.bits() >= cfg_.precision_cap) return false;
        level = level.next_up();
        z = z.with_precision(level);
        note_bits();
      }
    };

    auto rule_values = [&](double tau) {
      ErrorModel m = model;
      m.tau = tau;
      RuleInputs in;
      in.J_norm = norms.J;
      in.Jinv_norm = norms.Jinv;
      in.v_norm = max_norm(z);
      return std::pair<double, double>(rule_A_digits(m, in), rule_C_digits(m, in));
    };

    // raise precision until rules A and C hold at the current point
    auto enforce_AC = [&](double tau) -> bool {
      if (!adaptive) return true;
      auto [ra, rc] = rule_values(tau);
      double need = std::max(ra, rc);
      auto req = PrecisionLevel::for_digits(need, cfg_.precision_cap);
      if (!req.has_value()) return false;
      if (*req > level) {
        level = *req;
        z = z.with_precision(level);
        note_bits();
      }
      return true;
    };

    if (!refresh()) return fail(PathStatus::FailedPrecisionLimit, "singular start Jacobian");

    // polish the start point before the first step
    {
      ErrorModel m = model;
      m.tau = cfg_.tau.at(t);
      if (!enforce_AC(m.tau)) {
        return fail(PathStatus::FailedPrecisionLimit, "rules unsatisfiable at start");
      }
      CorrectorResult c =
          newton_correct(h_.form, z, t, level, m, norms.J, norms.Jinv, adaptive, cfg_.precision_cap);
      record(res, 0, t, 0.0, c, norms, m, affine_norm(h_.form, c.z),
             c.kind == CorrectorResult::Kind::Converged);
      if (c.kind == CorrectorResult::Kind::PrecisionLimit) {
        return fail(PathStatus::FailedPrecisionLimit, "precision limit at start point");
      }
      if (c.kind != CorrectorResult::Kind::Converged) {
        return fail(PathStatus::FailedMinStep, "start point does not satisfy the homotopy");
      }
      z = c.z;
      level = c.level;
      note_bits();
      if (!refresh()) return fail(PathStatus::FailedPrecisionLimit, "singular start Jacobian");
    }

    while (true) {
      if (!enforce_AC(cfg_.tau.at(t))) {
        return fail(PathStatus::FailedPrecisionLimit, "rules A/C exceed the precision cap");
      }
      if (s < cfg_.s_min) return fail(PathStatus::FailedMinStep, "step length below minimum");
      if (attempts >= cfg_.max_steps) return fail(PathStatus::FailedMaxSteps, "step budget exhausted");

      double remaining = t - cfg_.t_end;
      double dt;
      bool landing = false;
      if (cfg_.stop_mode == StopMode::reach_t_end && remaining <= s) {
        dt = remaining;
        landing = true;
      } else {
        dt = std::min(s, 0.5 * remaining);
      }

      ++attempts;
      PredictResult pred = euler_predict(h_.form, z, t, dt, level, model.eps_E);
      if (pred.singular) {
        TelemetryRecord rec{};
        rec.step = attempts;
        rec.t = t;
        rec.s = dt;
        rec.bits = level.bits();
        fill_norms(rec, norms);
        auto [ra, rc] = rule_values(cfg_.tau.at(t));
        rec.ruleA = ra;
        rec.ruleC = rc;
        rec.z_norm = affine_norm(h_.form, z);
        res.telemetry.push_back(rec);
        successes = 0;
        if (adaptive) {
          if (level.bits() >= cfg_.precision_cap) {
            return fail(PathStatus::FailedPrecisionLimit, "predictor singular at precision cap");
          }
          level = level.next_up();
          z = z.with_precision(level);
          note_bits();
          if (++predictor_raises > 3) {
            s = cfg_.a * s;  // escape hatch: precision raises alone are not converging
            predictor_raises = 0;
          }
        } else {
          s = cfg_.a * s;
        }
        continue;
      }

      double t_new = landing ? cfg_.t_end : t - dt;
      ErrorModel m = model;
      m.tau = cfg_.tau.at(t_new);
      CorrectorResult c = newton_correct(h_.form, pred.z, t_new, level, m, norms.J, norms.Jinv,
                                         adaptive, cfg_.precision_cap);
      if (c.kind == CorrectorResult::Kind::PrecisionLimit) {
        record(res, attempts, t_new, dt, c, norms, m, affine_norm(h_.form, c.z), false);
        return fail(PathStatus::FailedPrecisionLimit, "rules B/C exceed the precision cap");
      }

      if (c.kind == CorrectorResult::Kind::Singular) {
        record(res, attempts, t_new, dt, c, norms, m, affine_norm(h_.form, z), false);
        successes = 0;
        if (adaptive) {
          if (level.bits() >= cfg_.precision_cap) {
            return fail(PathStatus::FailedPrecisionLimit, "corrector singular at precision cap");
          }
          level = level.next_up();
          z = z.with_precision(level);
          note_bits();
        } else {
          s = cfg_.a * s;
        }
        continue;
      }

      if (c.kind == CorrectorResult::Kind::NotConverged) {
        record(res, attempts, t_new, dt, c, norms, m, affine_norm(h_.form, c.z), false);
        successes = 0;
        s = cfg_.a * s;
        continue;
      }

      // accepted step
      z = c.z;
      t = t_new;
      level = c.level;
      note_bits();
      ++res.accepted_steps;
      ++successes;
      predictor_raises = 0;

      if (!refresh()) {
        record(res, attempts, t, dt, c, norms, m, affine_norm(h_.form, z), true);
        return fail(PathStatus::FailedPrecisionLimit, "singular Jacobian after acceptance");
      }
      if (!enforce_AC(m.tau)) {
        record(res, attempts, t, dt, c, norms, m, affine_norm(h_.form, z), true);
        return fail(PathStatus::FailedPrecisionLimit, "rules A/C exceed the precision cap");
      }
      c.level = level;
      record(res, attempts, t, dt, c, norms, m, affine_norm(h_.form, z), true);

      if (cfg_.stop_mode == StopMode::reach_t_end && t <= cfg_.t_end) {
        res.status = PathStatus::Success;
        res.endpoint = z;
        res.t_reached = t;
        return res;
      }

      if (cfg_.stop_mode == StopMode::prediction_agreement) {
        PredictResult to_zero = euler_predict(h_.form, z, t, t, level, model.eps_E);
        if (!to_zero.singular) {
          if (last_pred.has_value()) {
            double gap = max_norm(to_zero.z - last_pred->with_precision(level));
            // With prediction error ~ C t^2, the gap between predictions from
            // t_prev and t puts the current prediction's own error at
            // gap * t^2 / (t_prev^2 - t^2); tiny steps would otherwise show
            // agreement long before the predictions are accurate.
            double denom = (last_pred_t + t) * (last_pred_t - t);
            double est = denom > 0 ? gap * t * t / denom : gap;
            double tol = std::pow(10.0, -m.tau);
            if (gap < tol && est < tol) {
              res.status = PathStatus::Success;
              res.endpoint = to_zero.z;
              res.t_reached = 0.0;
              return res;
            }
          }
          last_pred = to_zero.z;
          last_pred_t = t;
        }
      }

      if (successes >= cfg_.M) {
        s = s / cfg_.a;
        successes = 0;
        maybe_lower_precision(level, z, rule_values, cfg_.tau.at(t), adaptive);
      }
    }
  }

  template <typename RuleFn>
  void maybe_lower_precision(PrecisionLevel& level, MpVector& z, RuleFn rule_values, double tau,
                             bool adaptive) {
    if (!adaptive || level.bits() == PrecisionLevel::kDoubleBits) return;
    PrecisionLevel down = level.next_down();
    auto [ra, rc] = rule_values(tau);
    // step down only with two spare digits of headroom, to avoid thrashing
    if (static_cast<double>(down.decimal_digits()) > std::max(ra, rc) + 2.0) {
      level = down;
      z = z.with_precision(level);
    }
  }

  static void fill_norms(TelemetryRecord& rec, const Norms& n) {
    rec.J_norm = n.J;
    rec.Jinv_norm_est = n.Jinv;
    rec.cond_est = n.cond;
  }

  void record(PathResult& res, long step, double t, double dt, const CorrectorResult& c,
              const Norms& norms, const ErrorModel& m, double z_norm, bool accepted) {
    TelemetryRecord rec{};
    rec.step = step;
    rec.t = t;
    rec.s = dt;
    rec.bits = c.level.bits();
    fill_norms(rec, norms);
    RuleInputs in;
    in.J_norm = norms.J;
    in.Jinv_norm = norms.Jinv;
    in.v_norm = max_norm(c.z);
    rec.ruleA = rule_A_digits(m, in);
    rec.ruleB = c.ruleB;
    rec.ruleC = rule_C_digits(m, in);
    rec.corrector_iterations = c.iterations;
    rec.d_norm_final = c.d_norm;
    rec.accepted = accepted;
    rec.z_norm = z_norm;
    res.telemetry.push_back(rec);
  }

  const Homotopy& h_;
  ErrorModel base_model_;
  TrackerConfig cfg_;
  CoeffBounds::Source bounds_source_;
  Rng rng_;
};

/// Track one path of H from `z_start` (a solution of H(z,1) = 0).
inline PathResult track_path(const Homotopy& h, const MpVector& z_start, const ErrorModel& m,
                             const TrackerConfig& cfg,
                             CoeffBounds::Source source = CoeffBounds::Source::coeff_formula) {
  PathTracker tracker(h, m, cfg, source);
  return tracker.track(z_start);
}

}  // namespace mptrack
