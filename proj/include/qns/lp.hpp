#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qns {

enum class LpStatus { optimal, unbounded, infeasible };

template <class Scalar>
struct LpOutcome {
  LpStatus status = LpStatus::infeasible;
  Scalar value = Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> argmax;
  int iterations = 0;
};

/// max c.x subject to A x <= 1 (row-wise), x free.
///
/// Primal active-set method started from the feasible origin. Rows enter by a
/// ratio test and leave when their multiplier turns negative; ties and drops
/// both go to the smallest row index (Bland), which rules out cycling.
template <class DerivedA, class DerivedC>
LpOutcome<typename DerivedA::Scalar> lp_max(const Eigen::MatrixBase<DerivedA>& A,
                                            const Eigen::MatrixBase<DerivedC>& c, int max_iter = 10000) {
  using Scalar = typename DerivedA::Scalar;
  using VecS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = A.rows(), d = A.cols();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar cnorm = c.norm();

  LpOutcome<Scalar> out;
  out.argmax = VecS::Zero(d);
  VecS x = VecS::Zero(d);
  std::vector<Eigen::Index> work;
  std::vector<char> in_work(static_cast<std::size_t>(m), 0);
  VecS rownorm(m);
  for (Eigen::Index i = 0; i < m; ++i) rownorm[i] = A.row(i).norm();

  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const Eigen::Index w = static_cast<Eigen::Index>(work.size());
    VecS p = c;
    VecS mu;
    if (w > 0) {
      MatS AwT(d, w);
      for (Eigen::Index j = 0; j < w; ++j) AwT.col(j) = A.row(work[static_cast<std::size_t>(j)]).transpose();
      Eigen::HouseholderQR<MatS> qr(AwT);
      const MatS Q = qr.householderQ() * MatS::Identity(d, w);
      p = c - Q * (Q.transpose() * c);
      const MatS R = qr.matrixQR().topRows(w).template triangularView<Eigen::Upper>();
      mu = R.template triangularView<Eigen::Upper>().solve(Q.transpose() * c);
    }

    if (p.norm() <= Scalar(64) * eps * std::max(cnorm, Scalar(1))) {
      // c lies in the span of the working rows; check multiplier signs
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < w; ++j) {
        if (mu[j] < -Scalar(1e3) * eps * std::max(cnorm, Scalar(1))) {
          const Eigen::Index row = work[static_cast<std::size_t>(j)];
          if (drop < 0 || row < work[static_cast<std::size_t>(drop)]) drop = j;
        }
      }
      if (drop < 0) {
        out.status = LpStatus::optimal;
        out.argmax = x;
        out.value = c.dot(x);
        return out;
      }
      in_work[static_cast<std::size_t>(work[static_cast<std::size_t>(drop)])] = 0;
      work.erase(work.begin() + drop);
      continue;
    }

    // ratio test along p
    const VecS Ap = A * p;
    const VecS Ax = A * x;
    const Scalar pn = p.norm();
    Eigen::Index enter = -1;
    Scalar tbest = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_work[static_cast<std::size_t>(i)]) continue;
      if (Ap[i] <= Scalar(1e3) * eps * rownorm[i] * pn) continue;
      const Scalar t = std::max(Scalar(0), Scalar(1) - Ax[i]) / Ap[i];
      if (t < tbest * (Scalar(1) - Scalar(1e3) * eps)) {
        tbest = t;
        enter = i;
      }
    }
    if (enter < 0) {
      out.status = LpStatus::unbounded;
      out.value = std::numeric_limits<Scalar>::infinity();
      out.argmax = x;
      return out;
    }
    x += tbest * p;
    work.push_back(enter);
    in_work[static_cast<std::size_t>(enter)] = 1;
  }
  // iteration cap: report the best feasible point found
  out.status = LpStatus::optimal;
  out.argmax = x;
  out.value = c.dot(x);
  return out;
}

} // namespace qns
