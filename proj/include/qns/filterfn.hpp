#pragma once

#include "qns/core.hpp"

namespace qns {

/// Sampled filter function on an increasing angular-frequency grid.
struct FilterFunctionGrid {
  Vec omegas;
  Vec values;
  double total_time = 0.0;
};

/// Complex G_Z(omegas[i], omegas_prime[j]) in values(i, j).
struct HigherOrderFFGrid {
  Vec omegas;
  Vec omegas_prime;
  Eigen::MatrixXcd values;
  double total_time = 0.0;
};

/// F_Omega(w) = 1/4 |integral Omega(t) e^{iwt} dt|^2, each segment integrated exactly.
FilterFunctionGrid amplitude_ff(const PiecewiseConstantWaveform& w, const Vec& omegas);

/// F_Z(w) = |int e^{iwt} sin Theta|^2 + |int e^{iwt} cos Theta|^2 with Theta linear per segment.
FilterFunctionGrid dephasing_ff(const PiecewiseConstantWaveform& w, const Vec& omegas);

/// Same quantities on the padded DFT grid w_j = 2 pi j / (P dt), j = 0 .. count-1.
/// count defaults to P/2 + 1 (up to Nyquist). P may be smaller than N.
FilterFunctionGrid amplitude_ff_dft(const PiecewiseConstantWaveform& w, Index P, Index count = -1);
FilterFunctionGrid dephasing_ff_dft(const PiecewiseConstantWaveform& w, Index P, Index count = -1);

/// Reusable form of dephasing_ff_dft for many waveforms on one grid whose
/// peak |Omega| stays below max_abs_omega.
class DephasingDftPlan {
public:
  DephasingDftPlan(Index N, double dt, Index P, Index count, double max_abs_omega);
  FilterFunctionGrid evaluate(const PiecewiseConstantWaveform& w) const;
  Index count() const noexcept { return count_; }

private:
  Index N_, P_, count_;
  double dt_;
  int pmax_ = 0;
  Eigen::MatrixXcd plus_, minus_;
};

/// sin^2(M x) / sin^2(x), continuous through x = k pi.
double fejer_factor(int M, double x);

/// One period (2 pi / lambda) of cos Theta and sin Theta against e^{iwt}, for
/// Theta(t) = (Omega0 / lambda)(1 - cos lambda t). Returns {C, S}.
std::pair<cplx, cplx> single_period_integrals(double lambda, double omega0, double omega);

/// F_Z of M periods of the continuous dephasing-robust waveform: one-period
/// integrals by adaptive quadrature times the Fejer factor.
FilterFunctionGrid dephasing_ff_periodic_oracle(int M, double lambda, double omega0, const Vec& omegas);

/// Closed form of F_Omega for Omega0 sin(lambda t) over whole periods.
double dephasing_robust_amplitude_ff_closed_form(double omega0, double lambda, double T, double omega);

/// G_Z on frequencies that lie on the DFT grid 2 pi l / T (throws GridError otherwise).
HigherOrderFFGrid higher_order_ff(const PiecewiseConstantWaveform& w, const Vec& omegas,
                                  const Vec& omegas_prime);

/// Double integral int_0^T dt1 int_0^t1 dt2 sin(Theta1 - Theta2) e^{i a t1} e^{i b t2}
/// in the grid-point Riemann convention used by higher_order_ff.
cplx nested_sine_transform(const PiecewiseConstantWaveform& w, double a, double b);

} // namespace qns
