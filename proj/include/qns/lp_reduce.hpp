#pragma once

#include "qns/core.hpp"
#include "qns/lp.hpp"
#include "qns/slepian.hpp"

#include <cstdint>

namespace qns {

/// Rows a_m with a_m . x <= 1. labels[i] is the index of row i in the set it
/// was cut from.
struct AffineConstraintSet {
  Eigen::MatrixXd rows;
  std::vector<Index> labels;

  Index dim() const noexcept { return rows.cols(); }
  Index size() const noexcept { return rows.rows(); }

  /// a x <= b  ->  (a / b) x <= 1. Rejects b <= 0 and all-zero rows.
  static AffineConstraintSet from_inequalities(const Eigen::MatrixXd& A, const Vec& b);
  AffineConstraintSet subset(const std::vector<Index>& which) const;
  /// Largest a.x - 1 over rows (negative inside).
  double max_excess(const Vec& x) const;
};

LpOutcome<double> lp_max(const Vec& objective, const AffineConstraintSet& constraints);

/// max (row . x) - 1 subject to `active`; +inf when unbounded.
double max_violation(const Vec& row, const AffineConstraintSet& active);

/// As above for active.rows(row_index) against all other active rows.
double max_violation(Index row_index, const AffineConstraintSet& active);

/// Greedy keep (v > eps), tighten by 1+eps, then drop exact redundancies (v <= 0).
AffineConstraintSet prune_constraints(const AffineConstraintSet& full, double eps, std::uint64_t seed);

/// Peak-amplitude rows |sum_k v_m^(k)(c_k cos + s_k sin)| <= Omega_max for all m,
/// written for the dimensionless coefficients u = x / Omega_max in packed order.
AffineConstraintSet amplitude_constraints(const DpssSet& d, double omega0, double dt, Index K);

} // namespace qns
