#pragma once

#include "qns/core.hpp"

namespace qns {

/// K most concentrated Slepian sequences of length N and half-bandwidth W.
/// Row k of `sequences` is v^(k); `eigenvalues` are the concentrations.
struct DpssSet {
  Index N = 0;
  double W = 0.0;
  Eigen::MatrixXd sequences;
  Vec eigenvalues;

  Index K() const noexcept { return sequences.rows(); }
};

DpssSet dpss(Index N, double W, Index K);

/// v' A v for the sinc kernel A_nm = sin(2 pi W (n-m)) / (pi (n-m)).
double sinc_kernel_quadratic_form(const Vec& v, double W);

/// Fraction of the amplitude filter weight inside B and its mirror image -B,
/// where B = [center - halfwidth, center + halfwidth]. An infinite halfwidth gives 1.
double spectral_concentration(const PiecewiseConstantWaveform& w, double band_center,
                              double band_halfwidth);

} // namespace qns
