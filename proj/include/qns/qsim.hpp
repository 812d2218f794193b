#pragma once

#include "qns/core.hpp"
#include "qns/noisegen.hpp"

#include <array>
#include <cstdint>

namespace qns {

/// U = c0 I - i (c1 sigma_1 + c2 sigma_2 + c3 sigma_3) with c real and |c| = 1.
struct QubitPropagator {
  Eigen::Vector4d c = Eigen::Vector4d(1, 0, 0, 0);

  Eigen::Matrix2cd matrix() const;
  /// |<up_i|U|up_i>|^2 for the +1 eigenstates of sigma_1, sigma_2, sigma_3.
  std::array<double, 3> survival() const;
};

/// Product of exp(-i dt [(1 + b_omega) Omega / 2 sigma_1 + b_z sigma_3]) over the segments.
QubitPropagator propagate(const PiecewiseConstantWaveform& w, const Vec& beta_omega, const Vec& beta_z);
QubitPropagator propagate(const PiecewiseConstantWaveform& w, const NoiseRealization& amp,
                          const NoiseRealization& deph);

struct SimulationOptions {
  Index oversample = 8;   // noise synthesis, see SamplingOptions
  int shots = 0;          // 0: exact probabilities; otherwise binomial sampling per preparation
  bool diagnostics = false; // also record the Magnus quantities per realization
};

/// Per-realization values behind a SurvivalTriple, in realization order.
struct RealizationRecord {
  Eigen::MatrixX3d survival;     // p1, p2, p3
  Vec estimator;                 // (1 + p1 - p2 - p3) / 2
  Eigen::MatrixX3d a_first;      // a1, a2, a3 at first order (diagnostics only)
  Vec a1_second;                 // a1 at second order (diagnostics only)
};

struct SurvivalTriple {
  std::array<double, 3> p{1.0, 1.0, 1.0};
  std::array<double, 3> p_err{0.0, 0.0, 0.0};
  double estimator = 0.0;
  double estimator_err = 0.0;
  Index n_realizations = 0;
};

/// Monte Carlo over independent amplitude (stream 0) and dephasing (stream 1)
/// realizations. The three preparations share each noise realization.
SurvivalTriple survival_probabilities(const PiecewiseConstantWaveform& w, const SpectrumModel& amp,
                                      const SpectrumModel& deph, Index n_realizations, std::uint64_t seed,
                                      const SimulationOptions& opt = {}, RealizationRecord* record = nullptr);

/// (1 + p1 - p2 - p3) / 2 and its standard error from the p_err (conservative, ignores covariance).
std::pair<double, double> tomographic_estimator(const SurvivalTriple& t);

/// (1/2 int Omega b_omega, int sin(Theta) b_z, int cos(Theta) b_z), segment-exact.
Eigen::Vector3d error_vector_first_order(const PiecewiseConstantWaveform& w, const Vec& beta_omega,
                                         const Vec& beta_z);

/// int_0^T dt1 int_0^t1 dt2 sin(Theta1 - Theta2) b_z(t1) b_z(t2), segment-exact, O(N).
double magnus_second_order_a1(const PiecewiseConstantWaveform& w, const Vec& beta_z);

struct BiasBreakdown {
  double I_Omega = 0.0;
  double I_Z = 0.0;
  double a12_sq = 0.0;
  double a12_sq_err = 0.0;     // Monte-Carlo error of the stochastic part
  double detuning_term = 0.0;  // mu^4 D(0)^2 included in a12_sq
  double predicted = 0.0;      // I_Omega - I_Omega^2 - I_Omega I_Z / 3 + a12_sq

  double product_term() const noexcept { return I_Omega * I_Z / 3.0; }
};

struct BiasOptions {
  int points_per_linewidth = 16;   // quadrature nodes per 2 pi / T
  Index realizations = 2000;       // stochastic part of <a1^(2)^2>
  std::uint64_t seed = 1;
  Index oversample = 8;
};

/// (1/pi) int_0^inf S F_Omega, with panels split at the spectrum's kinks.
double overlap_amplitude(const PiecewiseConstantWaveform& w, const SpectrumModel& s, int points_per_linewidth = 16);
/// (1/pi) int_0^inf S_z F_Z + mu^2 F_Z(0).
double overlap_dephasing(const PiecewiseConstantWaveform& w, const SpectrumModel& s, int points_per_linewidth = 16);

/// Perturbative prediction of the estimator. The static-offset part of
/// <a1^(2)^2> is exact; any stochastic dephasing enters by Monte Carlo
/// over the same dephasing streams survival_probabilities uses.
BiasBreakdown bias_breakdown(const PiecewiseConstantWaveform& w, const SpectrumModel& amp, const SpectrumModel& deph,
                             const BiasOptions& opt = {});

/// G_Z overlap of two spectra on the 2 pi l / T grid, l in [-L, L] (Riemann sum; coarse).
double gz_overlap_riemann(const PiecewiseConstantWaveform& w, const SpectrumModel& deph, Index L);

} // namespace qns
