// Independent reference computations shared by unit tests and the acceptance run.
#pragma once

#include "qns/core.hpp"
#include "qns/lp_reduce.hpp"
#include "qns/rng.hpp"
#include "qns/waveform.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace oracle {

using qns::cplx;
using qns::Index;
using qns::Vec;

// Dense sinc-kernel Toeplitz eigenpairs, descending.
inline std::pair<Vec, Eigen::MatrixXd> dense_dpss(Index N, double W) {
  Eigen::MatrixXd A(N, N);
  for (Index n = 0; n < N; ++n)
    for (Index m = 0; m < N; ++m)
      A(n, m) = n == m ? 2.0 * W : std::sin(2.0 * qns::pi * W * (n - m)) / (qns::pi * (n - m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  Vec ev = es.eigenvalues().reverse();
  Eigen::MatrixXd vec = es.eigenvectors().rowwise().reverse();
  return {ev, vec};
}

// J0 by the trapezoid rule on (1/pi) int_0^pi cos(x sin t) dt, spectrally exact for smooth periodic integrands.
inline double j0_trapezoid(double x, int n = 400) {
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += std::cos(x * std::sin(qns::pi * (k + 0.5) / n));
  return acc / n;
}

inline double j0_root_bisect(double lo, double hi) {
  double flo = j0_trapezoid(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = j0_trapezoid(mid);
    if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Quadruple-sum G_Z with Theta on the grid points and j2 <= j1, j4 <= j3.
inline cplx gz_bruteforce(const qns::PiecewiseConstantWaveform& w, double om, double omp) {
  const Index N = w.size();
  const double dt = w.dt;
  const Vec th = qns::rotation_angle(w);
  std::vector<cplx> ea(N), eb(N);
  for (Index j = 0; j < N; ++j) {
    ea[j] = std::polar(1.0, om * dt * j);
    eb[j] = std::polar(1.0, omp * dt * j);
  }
  cplx acc = 0.0;
  for (Index j1 = 0; j1 < N; ++j1)
    for (Index j2 = 0; j2 <= j1; ++j2) {
      const double s12 = std::sin(th[j1] - th[j2]);
      if (s12 == 0.0) continue;
      for (Index j3 = 0; j3 < N; ++j3)
        for (Index j4 = 0; j4 <= j3; ++j4) {
          const double s34 = std::sin(th[j3] - th[j4]);
          const cplx k = ea[j1] * std::conj(ea[j2]) * eb[j3] * std::conj(eb[j4]) +
                         ea[j1] * std::conj(ea[j3]) * eb[j2] * std::conj(eb[j4]) +
                         ea[j1] * std::conj(ea[j4]) * eb[j2] * std::conj(eb[j3]);
          acc += s12 * s34 * k;
        }
    }
  return acc * std::pow(dt, 4);
}

inline qns::PiecewiseConstantWaveform random_waveform(Index N, double dt, double amp, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  Vec s(N);
  for (Index i = 0; i < N; ++i) s[i] = u(g);
  return {s, dt};
}

// Uniform-direction ray from the origin to the boundary, then a random fraction of the way out.
inline Vec sample_in(const qns::AffineConstraintSet& s, qns::Rng& rng, bool boundary) {
  Vec u(s.dim());
  for (Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
  u.normalize();
  const Vec au = s.rows * u;
  double tmax = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < au.size(); ++i)
    if (au[i] > 0) tmax = std::min(tmax, 1.0 / au[i]);
  const double frac = boundary ? 1.0 : std::pow(rng.uniform(), 1.0 / static_cast<double>(s.dim()));
  return frac * tmax * u;
}

} // namespace oracle
