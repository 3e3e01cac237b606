#pragma once

#include <limits>
#include <optional>

#include "mptrack/containers.hpp"
#include "mptrack/rng.hpp"

namespace mptrack {

/// Outcome of one Gaussian-elimination solve. `declared_singular` means some
/// stage had no pivot above the u*eps_E*|A| threshold; that is a signal the
/// caller branches on, not an exception.
struct SolveReport {
  MpVector solution;
  double pivot_min = std::numeric_limits<double>::infinity();
  bool declared_singular = false;
};

/// Solve Ax = b by Gaussian elimination with partial pivoting at A's
/// precision. Declares singularity when the largest available pivot magnitude
/// falls below u * eps_E * max_norm(A).
inline SolveReport solve(const MpMatrix& A, const MpVector& b, double eps_E) {
  const std::size_t n = A.rows();
  if (A.cols() != n || b.size() != n) throw std::invalid_argument("solve: dimension mismatch");
  const PrecisionLevel level = A.level();
  const double threshold = level.unit_roundoff() * eps_E * max_norm(A);

  MpMatrix M = A.with_precision(level);
  MpVector rhs = b.with_precision(level);
  SolveReport rep;

  std::vector<std::size_t> row(n);
  for (std::size_t i = 0; i < n; ++i) row[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t best = k;
    double best_mag = M.at(row[k], k).modulus_double();
    for (std::size_t i = k + 1; i < n; ++i) {
      double mag = M.at(row[i], k).modulus_double();
      if (mag > best_mag) {
        best_mag = mag;
        best = i;
      }
    }
    if (!(best_mag >= threshold) || best_mag == 0.0) {
      rep.pivot_min = std::min(rep.pivot_min, best_mag);
      rep.declared_singular = true;
      return rep;
    }
    std::swap(row[k], row[best]);
    rep.pivot_min = std::min(rep.pivot_min, best_mag);

    const MpComplex& pivot = M.at(row[k], k);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (M.at(row[i], k).is_zero()) continue;
      MpComplex factor = M.at(row[i], k) / pivot;
      for (std::size_t j = k + 1; j < n; ++j) {
        M.set(row[i], j, M.at(row[i], j) - factor * M.at(row[k], j));
      }
      rhs.set(row[i], rhs[row[i]] - factor * rhs[row[k]]);
    }
  }

  MpVector x(n, level);
  for (std::size_t k = n; k-- > 0;) {
    MpComplex acc = rhs[row[k]];
    for (std::size_t j = k + 1; j < n; ++j) acc = acc - M.at(row[k], j) * x[j];
    x.set(k, acc / M.at(row[k], k));
  }
  rep.solution = std::move(x);
  return rep;
}

/// One-solve probe for |A^-1|: draw b with every component on the complex unit
/// circle (max-norm 1), solve Ay = b, report |y|. Underestimates the true
/// norm, typically within a factor of 10; safety margins absorb that.
inline std::optional<double> inv_norm_estimate(const MpMatrix& A, Rng& rng, double eps_E) {
  MpVector b(A.rows(), A.level());
  for (std::size_t i = 0; i < b.size(); ++i) {
    b.set(i, rng.next_unit_complex(A.level()));
  }
  SolveReport rep = solve(A, b, eps_E);
  if (rep.declared_singular) return std::nullopt;
  return max_norm(rep.solution);
}

/// kappa ~ |A| * |A^-1| from the single-solve probe.
inline std::optional<double> condition_estimate(const MpMatrix& A, Rng& rng, double eps_E) {
  auto inv = inv_norm_estimate(A, rng, eps_E);
  if (!inv.has_value()) return std::nullopt;
  return max_norm(A) * *inv;
}

}  // namespace mptrack
