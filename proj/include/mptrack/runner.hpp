#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mptrack/config.hpp"
#include "mptrack/homotopy.hpp"
#include "mptrack/parser.hpp"
#include "mptrack/poly.hpp"
#include "mptrack/system_io.hpp"
#include "mptrack/tracker.hpp"

namespace mptrack {

/// A fully assembled tracking problem: homotopy, start points, and the
/// t-independent tracked target (for endpoint verification).
struct Problem {
  Homotopy homotopy;
  std::vector<MpVector> start_points;
  SlpSystem tracked_target;  // f (homogenized, patches appended)
  ComplexRational gamma;
  std::vector<std::string> tracked_variables;
};

namespace detail {

/// Per-group affine-linear patch data: coefficient per extended variable plus
/// a constant term.
struct PatchData {
  std::vector<ComplexRational> coeffs;
  ComplexRational constant;
};

inline std::vector<PatchData> extract_patch_data(const SlpSystem& patches) {
  std::vector<PatchData> out;
  for (const SparsePoly& eq : expand_to_monomials(patches)) {
    PatchData pd;
    pd.coeffs.assign(patches.num_variables(), ComplexRational(0, 0));
    for (const auto& [k, c] : eq) {
      int nz = -1;
      long total = 0;
      for (std::size_t v = 0; v < patches.num_variables(); ++v) {
        total += k[v];
        if (k[v] == 1) nz = static_cast<int>(v);
      }
      if (k.back() != 0) throw std::invalid_argument("patch equations must be t-independent");
      if (total == 0) {
        pd.constant = c;
      } else if (total == 1) {
        pd.coeffs[nz] = c;
      } else {
        throw std::invalid_argument("patch equations must be affine linear");
      }
    }
    out.push_back(std::move(pd));
  }
  return out;
}

/// Generate one random patch per group: sum of unit-modulus coefficients over
/// the group members, plus the homogenizing variable, plus a unit constant.
inline SlpSystem random_patches(const std::vector<std::string>& ext_vars,
                                const std::vector<VariableGroup>& groups, Rng& rng) {
  SlpBuilder bld(ext_vars);
  const std::size_t n = ext_vars.size() - groups.size();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::uint32_t acc = bld.variable(static_cast<std::uint32_t>(n + g));
    for (std::uint32_t m : groups[g].members) {
      std::uint32_t term = bld.mul(bld.constant(rng.next_unit_rational()), bld.variable(m));
      acc = bld.add(acc, term);
    }
    acc = bld.add(acc, bld.constant(rng.next_unit_rational()));
    bld.output(acc);
  }
  return bld.finish();
}

/// Lift affine start points through the patches: x = (lambda_g z_j, lambda_g),
/// where each patch must touch only its own group.
inline MpVector lift_point(const MpVector& affine, const std::vector<VariableGroup>& groups,
                           const std::vector<PatchData>& patches, std::size_t n_base) {
  const PrecisionLevel level = affine.level();
  MpVector x(n_base + groups.size(), level);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const PatchData& pd = patches[g];
    // L = sum over members a_j z_j + a_H
    MpComplex L(pd.coeffs[n_base + g], level);
    for (std::size_t v = 0; v < n_base + groups.size(); ++v) {
      if (pd.coeffs[v].is_zero()) continue;
      bool in_group = v == n_base + g;
      for (std::uint32_t m : groups[g].members) in_group |= (v == m);
      if (!in_group) {
        throw std::invalid_argument(
            "automatic start points require each patch to touch only its own group");
      }
      if (v < n_base) L = L + MpComplex(pd.coeffs[v], level) * affine[v];
    }
    MpComplex lambda = -MpComplex(pd.constant, level) / L;
    x.set(n_base + g, lambda);
    for (std::uint32_t m : groups[g].members) x.set(m, lambda * affine[m]);
  }
  return x;
}

}  // namespace detail

/// Assemble a parsed system file into a trackable problem. Missing pieces are
/// generated from the seed: gamma (unit modulus), patches (one per group), and
/// a total-degree start system with its points. The draw order is fixed:
/// gamma, then patch coefficients, then start-system constants.
inline Problem assemble_problem(const SystemFile& sf,
                                std::optional<std::vector<MpVector>> start_points,
                                std::uint64_t seed) {
  Rng rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  Problem prob;
  prob.gamma = sf.gamma.has_value() ? *sf.gamma : rng.next_unit_rational();

  const std::size_t n_base = sf.base_variables.size();
  if (sf.target.num_equations() != n_base) {
    throw std::invalid_argument("tracking requires a square system (equations = variables)");
  }

  SlpSystem target_full = sf.target;
  SlpSystem patches;
  std::vector<std::string> ext_vars = sf.base_variables;
  if (!sf.groups.empty()) {
    for (const auto& g : sf.groups) ext_vars.push_back(g.hom_name);
    patches = sf.patches.has_value() ? *sf.patches
                                     : detail::random_patches(ext_vars, sf.groups, rng);
    target_full = homogenize(sf.target, sf.groups, patches);
  }
  prob.tracked_target = target_full;
  prob.tracked_variables = ext_vars;

  SlpSystem start_full;
  if (sf.start.has_value()) {
    if (sf.start->num_equations() != n_base) {
      throw std::invalid_argument("start system must match the target equation count");
    }
    if (!start_points.has_value()) {
      throw std::invalid_argument("a start-point file is required with start_function");
    }
    if (sf.groups.empty()) {
      start_full = *sf.start;
    } else {
      // splice start equations and append the same patches
      SlpBuilder bld(ext_vars);
      for (std::uint32_t out : append_system(bld, *sf.start)) bld.output(out);
      for (std::uint32_t out : append_system(bld, patches)) bld.output(out);
      start_full = bld.finish();
    }
    prob.start_points = std::move(*start_points);
  } else {
    // total-degree start from the affine target degrees
    StartSystem td = total_degree_start(sf.base_variables, sf.target.degrees(), rng);
    if (sf.groups.empty()) {
      start_full = td.system;
      prob.start_points = std::move(td.points);
    } else {
      start_full = homogenize(td.system, sf.groups, patches);
      std::vector<detail::PatchData> pd = detail::extract_patch_data(patches);
      for (const MpVector& p : td.points) {
        prob.start_points.push_back(detail::lift_point(p, sf.groups, pd, n_base));
      }
    }
    if (start_points.has_value()) prob.start_points = std::move(*start_points);
  }

  for (const MpVector& p : prob.start_points) {
    if (p.size() != ext_vars.size()) {
      throw std::invalid_argument("start points must have one coordinate per tracked variable");
    }
  }

  prob.homotopy =
      make_linear_homotopy(target_full, start_full, prob.gamma, sf.groups.size());
  return prob;
}

/// The error model a run uses, after resolving defaults against the problem.
inline ErrorModel resolve_error_model(const Problem& prob, const RunConfig& cfg) {
  ErrorModel m;
  m.sigma1 = cfg.sigma1;
  m.sigma2 = cfg.sigma2;
  m.N = cfg.tracker.N;
  double n = static_cast<double>(prob.tracked_variables.size());
  m.eps_E = cfg.eps_E > 0 ? cfg.eps_E : n * n;
  switch (cfg.bounds) {
    case CoeffBounds::Source::user_supplied:
      m.Psi = cfg.psi_user;
      m.Phi = cfg.phi_user;
      break;
    case CoeffBounds::Source::slp_accumulated:
      // refreshed per point by the tracker
      m.Psi = 0;
      m.Phi = 0;
      break;
    case CoeffBounds::Source::coeff_formula: {
      CoeffBounds b = coeff_bounds(prob.homotopy.form);
      m.Psi = b.Psi;
      m.Phi = b.Phi;
      break;
    }
  }
  return m;
}

struct RunOutput {
  std::vector<PathResult> paths;
  ErrorModel model;
};

/// Track every start point; paths are independent and may run on a worker
/// pool. Results are ordered by path index regardless of scheduling.
inline RunOutput run_all(const Problem& prob, const RunConfig& cfg) {
  RunOutput out;
  out.model = resolve_error_model(prob, cfg);
  out.paths.resize(prob.start_points.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= prob.start_points.size()) return;
      TrackerConfig tc = cfg.tracker;
      tc.seed = Rng::for_stream(cfg.tracker.seed, i).next_u64();
      out.paths[i] = track_path(prob.homotopy, prob.start_points[i], out.model, tc, cfg.bounds);
    }
  };

  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

/// Residual of the tracked target at each endpoint, evaluated at 128 bits.
inline std::vector<double> verify_endpoints(const Problem& prob,
                                            const std::vector<PathResult>& paths) {
  const PrecisionLevel level = PrecisionLevel::from_bits(128);
  std::vector<double> out;
  out.reserve(paths.size());
  for (const PathResult& r : paths) {
    if (r.endpoint.size() != prob.tracked_variables.size()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    MpVector res = evaluate(prob.tracked_target, r.endpoint.with_precision(level),
                            MpComplex(level), level);
    out.push_back(max_norm(res));
  }
  return out;
}

inline std::string summary_text(const Problem& prob, const RunConfig& cfg, const RunOutput& run) {
  std::string s;
  s += "tracked variables:";
  for (const auto& v : prob.tracked_variables) s += " " + v;
  s += "\npaths: " + std::to_string(prob.start_points.size());
  s += "\nseed: " + std::to_string(cfg.tracker.seed);
  s += "\ngamma: " + prob.gamma.to_string();
  s += "\nmode: ";
  s += cfg.tracker.mode == TrackMode::adaptive ? "adaptive"
       : cfg.tracker.mode == TrackMode::fixed  ? "fixed"
                                               : "rerun";
  if (cfg.tracker.mode == TrackMode::fixed) s += " (" + std::to_string(cfg.tracker.fixed_bits) + " bits)";
  s += "\nPsi: " + detail::fmt(run.model.Psi, "%.10g") + "  Phi: " + detail::fmt(run.model.Phi, "%.10g");
  s += "\neps_E: " + detail::fmt(run.model.eps_E, "%.10g");
  s += "\nsigma1: " + std::to_string(run.model.sigma1) + "  sigma2: " + std::to_string(run.model.sigma2);
  s += "\ntau:";
  for (const auto& [t, tau] : cfg.tracker.tau.entries) {
    s += " " + detail::fmt(t, "%.6g") + ":" + detail::fmt(tau, "%.6g");
  }
  s += "\n\npath  status                 t_reached     steps  bits_max\n";
  std::size_t ok = 0;
  for (std::size_t i = 0; i < run.paths.size(); ++i) {
    const PathResult& r = run.paths[i];
    char line[128];
    std::snprintf(line, sizeof line, "%-5zu %-22s %-13.6g %-6ld %d\n", i, to_string(r.status),
                  r.t_reached, r.accepted_steps, r.max_bits_used);
    s += line;
    if (r.status == PathStatus::Success) ++ok;
  }
  s += "\nsucceeded: " + std::to_string(ok) + " / " + std::to_string(run.paths.size()) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Built-in problem generators (system text + start points)

struct GeneratedProblem {
  std::string system_text;
  std::vector<MpVector> start_points;
};

inline GeneratedProblem gen_griewank() {
  GeneratedProblem g;
  g.system_text = griewank_system_text();
  g.start_points = griewank_start_points();
  return g;
}

inline GeneratedProblem gen_chebyshev(int degree, std::uint64_t seed) {
  Rng rng(seed ^ 0xc0ffee1234567890ULL);
  ComplexRational gamma = rng.next_unit_rational();
  ComplexRational r = rng.next_unit_rational();
  GeneratedProblem g;
  std::string s = "variables x;\n";
  s += "define P0 = 2;\n";
  s += "define P1 = x;\n";
  for (int i = 2; i <= degree; ++i) {
    s += "define P" + std::to_string(i) + " = x*P" + std::to_string(i - 1) + " - P" +
         std::to_string(i - 2) + "/4;\n";
  }
  s += "function P" + std::to_string(degree) + ";\n";
  s += "start_function x^" + std::to_string(degree) + " - (" + r.to_string() + ");\n";
  s += "gamma " + rational_to_string(gamma.re) + " " + rational_to_string(gamma.im) + ";\n";
  const PrecisionLevel level = PrecisionLevel::from_bits(128);
  for (const MpComplex& root : detail::roots_of(r, degree, level)) {
    MpVector p(1, level);
    p.set(0, root);
    g.start_points.push_back(std::move(p));
  }
  g.system_text = std::move(s);
  return g;
}

inline GeneratedProblem gen_chemical(std::uint64_t seed) {
  Rng rng(seed ^ 0x00c4e317dead0001ULL);
  ComplexRational gamma = rng.next_unit_rational();
  std::vector<ComplexRational> patch_coeff;
  for (int i = 0; i < 3; ++i) patch_coeff.push_back(rng.next_unit_rational());
  ComplexRational patch_const = rng.next_unit_rational();
  std::vector<ComplexRational> r;
  for (int i = 0; i < 3; ++i) r.push_back(rng.next_unit_rational());

  std::string s = chemical_system_text();
  s += "group H1: z1, z2, z3;\n";
  s += "patch (" + patch_coeff[0].to_string() + ")*z1 + (" + patch_coeff[1].to_string() +
       ")*z2 + (" + patch_coeff[2].to_string() + ")*z3 + H1 + (" + patch_const.to_string() +
       ");\n";
  const int degrees[3] = {2, 3, 2};
  const char* vars[3] = {"z1", "z2", "z3"};
  for (int i = 0; i < 3; ++i) {
    s += std::string("start_function ") + vars[i] + "^" + std::to_string(degrees[i]) + " - (" +
         r[i].to_string() + ")*H1^" + std::to_string(degrees[i]) + ";\n";
  }
  s += "gamma " + rational_to_string(gamma.re) + " " + rational_to_string(gamma.im) + ";\n";

  GeneratedProblem g;
  g.system_text = s;

  // affine root combinations lifted through the patch
  const PrecisionLevel level = PrecisionLevel::from_bits(128);
  std::vector<std::vector<MpComplex>> roots;
  for (int i = 0; i < 3; ++i) roots.push_back(detail::roots_of(r[i], degrees[i], level));
  for (std::size_t i0 = 0; i0 < roots[0].size(); ++i0) {
    for (std::size_t i1 = 0; i1 < roots[1].size(); ++i1) {
      for (std::size_t i2 = 0; i2 < roots[2].size(); ++i2) {
        // patch: sum a_j z_j + H1 + c = 0 with z_j = w_j * H1
        MpComplex L(1.0, 0.0, level);
        const MpComplex* w[3] = {&roots[0][i0], &roots[1][i1], &roots[2][i2]};
        for (int j = 0; j < 3; ++j) L = L + MpComplex(patch_coeff[j], level) * *w[j];
        MpComplex lambda = -MpComplex(patch_const, level) / L;
        MpVector p(4, level);
        for (int j = 0; j < 3; ++j) p.set(j, lambda * *w[j]);
        p.set(3, lambda);
        g.start_points.push_back(std::move(p));
      }
    }
  }
  return g;
}

inline GeneratedProblem gen_total_degree(const std::vector<std::string>& vars,
                                         const std::vector<int>& degrees, std::uint64_t seed) {
  Rng rng(seed ^ 0x70d0d366ULL);
  StartSystem td = total_degree_start(vars, degrees, rng);
  GeneratedProblem g;
  std::string s = "variables ";
  for (std::size_t i = 0; i < vars.size(); ++i) s += (i ? ", " : "") + vars[i];
  s += ";\n";
  std::vector<SparsePoly> eqs = expand_to_monomials(td.system);
  for (std::size_t e = 0; e < eqs.size(); ++e) {
    // g_i = z_i^{d_i} - r_i; recover r_i from the constant term
    ComplexRational r(0, 0);
    for (const auto& [k, c] : eqs[e]) {
      bool constant = true;
      for (std::uint16_t kk : k) constant &= (kk == 0);
      if (constant) r = -c;
    }
    s += std::string("function ") + vars[e] + "^" + std::to_string(degrees[e]) + " - (" +
         r.to_string() + ");\n";
  }
  g.system_text = std::move(s);
  g.start_points = std::move(td.points);
  return g;
}

}  // namespace mptrack
