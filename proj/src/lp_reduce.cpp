#include "qns/lp_reduce.hpp"

#include "qns/rng.hpp"
#include "qns/waveform.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace qns {

AffineConstraintSet AffineConstraintSet::from_inequalities(const Eigen::MatrixXd& A, const Vec& b) {
  if (A.rows() != b.size()) throw ParameterError("constraints: row count and rhs length differ");
  AffineConstraintSet s;
  s.rows.resize(A.rows(), A.cols());
  s.labels.resize(static_cast<std::size_t>(A.rows()));
  for (Index i = 0; i < A.rows(); ++i) {
    if (!(b[i] > 0.0)) throw ParameterError("constraints: right-hand side must be positive");
    if (A.row(i).cwiseAbs().maxCoeff() == 0.0) throw ParameterError("constraints: all-zero row");
    s.rows.row(i) = A.row(i) / b[i];
    s.labels[static_cast<std::size_t>(i)] = i;
  }
  return s;
}

AffineConstraintSet AffineConstraintSet::subset(const std::vector<Index>& which) const {
  AffineConstraintSet s;
  s.rows.resize(static_cast<Index>(which.size()), dim());
  s.labels.reserve(which.size());
  for (std::size_t i = 0; i < which.size(); ++i) {
    s.rows.row(static_cast<Index>(i)) = rows.row(which[i]);
    s.labels.push_back(labels[static_cast<std::size_t>(which[i])]);
  }
  return s;
}

double AffineConstraintSet::max_excess(const Vec& x) const {
  if (size() == 0) return -1.0;
  return (rows * x).maxCoeff() - 1.0;
}

LpOutcome<double> lp_max(const Vec& objective, const AffineConstraintSet& constraints) {
  if (objective.size() != constraints.dim()) throw ParameterError("lp_max: dimension mismatch");
  return lp_max(constraints.rows, objective);
}

namespace {

template <class Derived>
double violation(const Vec& row, const Eigen::MatrixBase<Derived>& A) {
  const auto r = lp_max(A, row);
  if (r.status == LpStatus::unbounded) return std::numeric_limits<double>::infinity();
  return r.value - 1.0;
}

} // namespace

double max_violation(const Vec& row, const AffineConstraintSet& active) {
  if (row.size() != active.dim()) throw ParameterError("max_violation: dimension mismatch");
  return violation(row, active.rows);
}

double max_violation(Index row_index, const AffineConstraintSet& active) {
  if (row_index < 0 || row_index >= active.size()) throw ParameterError("max_violation: row index out of range");
  Eigen::MatrixXd others(active.size() - 1, active.dim());
  others << active.rows.topRows(row_index), active.rows.bottomRows(active.size() - row_index - 1);
  return violation(active.rows.row(row_index).transpose(), others);
}

AffineConstraintSet prune_constraints(const AffineConstraintSet& full, double eps, std::uint64_t seed) {
  if (!(eps > 0.0)) throw ParameterError("prune_constraints: eps must be positive");
  const Index d = full.dim();
  Rng rng(seed);

  std::vector<Index> order(static_cast<std::size_t>(full.size()));
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(order);

  Eigen::MatrixXd kept(std::min<Index>(full.size(), 64), d);
  std::vector<Index> kept_idx;
  for (Index i : order) {
    const Vec row = full.rows.row(i).transpose();
    const Index k = static_cast<Index>(kept_idx.size());
    const double v = violation(row, kept.topRows(k));
    if (v > eps) {
      if (k == kept.rows()) kept.conservativeResize(2 * k, d);
      kept.row(k) = row.transpose();
      kept_idx.push_back(i);
    }
  }

  // tighten: a x <= 1/(1+eps)  ->  (1+eps) a x <= 1
  AffineConstraintSet act = full.subset(kept_idx);
  act.rows *= (1.0 + eps);

  std::vector<Index> pos(kept_idx.size());
  std::iota(pos.begin(), pos.end(), Index{0});
  rng.shuffle(pos);
  std::vector<char> alive(kept_idx.size(), 1);
  for (Index p : pos) {
    std::vector<Index> others;
    for (std::size_t j = 0; j < alive.size(); ++j)
      if (alive[j] && static_cast<Index>(j) != p) others.push_back(static_cast<Index>(j));
    Eigen::MatrixXd A(static_cast<Index>(others.size()), d);
    for (std::size_t j = 0; j < others.size(); ++j) A.row(static_cast<Index>(j)) = act.rows.row(others[j]);
    if (violation(act.rows.row(p).transpose(), A) <= 0.0) alive[static_cast<std::size_t>(p)] = 0;
  }
  std::vector<Index> survivors;
  for (std::size_t j = 0; j < alive.size(); ++j)
    if (alive[j]) survivors.push_back(static_cast<Index>(j));
  return act.subset(survivors);
}

AffineConstraintSet amplitude_constraints(const DpssSet& d, double omega0, double dt, Index K) {
  const Eigen::MatrixXd B = modulated_basis(d, omega0, dt, K);
  AffineConstraintSet s;
  s.rows.resize(2 * B.rows(), B.cols());
  Index n = 0;
  for (Index m = 0; m < B.rows(); ++m) {
    if (B.row(m).cwiseAbs().maxCoeff() == 0.0) continue;
    s.rows.row(n++) = B.row(m);
    s.labels.push_back(2 * m);
    s.rows.row(n++) = -B.row(m);
    s.labels.push_back(2 * m + 1);
  }
  s.rows.conservativeResize(n, B.cols());
  return s;
}

} // namespace qns
