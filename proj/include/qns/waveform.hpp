#pragma once

#include "qns/bessel.hpp"
#include "qns/core.hpp"
#include "qns/slepian.hpp"

namespace qns {

/// Amplitudes of the cosine- and sine-modulated Slepian basis.
/// Packed layout used by the optimizer: x = (cos_0..cos_{K-1}, sin_0..sin_{K-1}).
struct WaveformCoefficients {
  double omega0 = 0.0;
  Vec cos_coeffs;
  Vec sin_coeffs;

  Index K() const noexcept { return cos_coeffs.size(); }
  Vec packed() const;
  static WaveformCoefficients from_packed(double omega0, const Vec& x);
};

/// Omega0 = lambda * j_{0,root}, optionally nudged so the sampled waveform has
/// an exactly vanishing DC dephasing filter (see dephasing_robust).
double dephasing_robust_amplitude(double T, int M, int root_index, Index N, bool polish = true);

/// Omega0 sin(lambda m dt) with lambda = 2 pi M / T. With `polish`, Omega0 is
/// moved off lambda*j_{0,root} by a relative ~1e-6 so that the sampled waveform
/// (not just its continuum limit) has F_Z(0) = 0.
PiecewiseConstantWaveform dephasing_robust(double T, int M, int root_index, Index N,
                                           bool polish = true);

/// amp_max * v_m sin(lambda m dt), where v is the leading Slepian sequence of
/// length N+1 scaled to unit peak and truncated to its first N samples. The
/// extra sample makes v_m = v_{N-m}, which pairs with sin to give zero net rotation.
PiecewiseConstantWaveform modulated_dpss_waveform(Index N, double W, double amp_max, double lambda,
                                                  double dt);

/// N x 2K matrix whose columns are v^(k) cos(omega0 m dt), then v^(k) sin(omega0 m dt).
Eigen::MatrixXd modulated_basis(const DpssSet& d, double omega0, double dt, Index K);

PiecewiseConstantWaveform synthesize(const WaveformCoefficients& c, const DpssSet& d, double dt);

/// Theta_0 = 0, Theta_{i+1} = Theta_i + dt Omega_i; N+1 values.
Vec rotation_angle(const PiecewiseConstantWaveform& w);

} // namespace qns
