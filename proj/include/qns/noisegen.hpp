#pragma once

#include "qns/core.hpp"

#include <cstdint>
#include <limits>

namespace qns {

enum class SpectrumKind { flat_cutoff, one_over_f, dc_delta };

/// One-sided noise spectra in rad/s units. The autocovariance convention is
/// C(tau) = (1/pi) int_0^inf S(w) cos(w tau) dw, which makes the variance of
/// int y beta equal (1/pi) int_0^inf S F.
struct SpectrumModel {
  SpectrumKind kind = SpectrumKind::flat_cutoff;
  double a_omega = 0.0;   // flat level
  double c = 1.0;         // 1/f scale factor
  double a_z = 0.0;
  double omega_l = 0.0;
  double omega_h = 0.0;
  double mu = 0.0;        // static offset, dc_delta only

  static SpectrumModel flat(double a_omega, double omega_h);
  static SpectrumModel one_over_f(double c, double a_z, double omega_l, double omega_h);
  static SpectrumModel detuning(double mu);
  /// Zero spectrum (a flat model with zero level).
  static SpectrumModel none();

  void validate() const;
  bool dephasing_kind() const noexcept { return kind != SpectrumKind::flat_cutoff; }
  bool silent() const;
  /// Highest frequency with nonzero density (0 for dc_delta).
  double cutoff() const noexcept { return kind == SpectrumKind::dc_delta ? 0.0 : omega_h; }
  /// Points where the density has a kink; quadrature panels break here.
  std::vector<double> breakpoints() const;
};

double psd_eval(const SpectrumModel& m, double omega);

/// (1/pi) int_0^inf S(w) dw, the stochastic variance (excludes the static offset).
double process_variance(const SpectrumModel& m);

struct NoiseRealization {
  Vec samples;
  double mean = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

struct SamplingOptions {
  /// The harmonic grid has spacing 2 pi / (oversample N dt); only the first N
  /// samples of the longer record are kept, so the process is not periodic in T.
  Index oversample = 8;
  /// Separates independent processes (amplitude, dephasing) drawn under one seed.
  std::uint64_t stream = 0;
};

/// mu + sum_j sqrt(S(w_j) dw / pi) (A_j cos w_j t + B_j sin w_j t), A_j, B_j ~ N(0, 1).
NoiseRealization sample_process(const SpectrumModel& m, Index N, double dt, std::uint64_t seed, std::uint64_t index,
                                const SamplingOptions& opt = {});

/// chi(T) = (1/pi) int_0^inf S(w) 4 sin^2(wT/2)/w^2 dw (+ mu^2 T^2 for a static offset).
double free_decay_exponent(const SpectrumModel& m, double T);

/// Smallest T with chi(T) = 1/2, or +inf if chi(t_max) stays below that.
/// With the beta_z sigma_3 coupling the coherence decays as exp(-2 chi), so
/// this is its 1/e time. Dephasing models only.
double t2_estimate(const SpectrumModel& m, double t_max);

} // namespace qns
