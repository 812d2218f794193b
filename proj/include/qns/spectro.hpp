#pragma once

#include "qns/core.hpp"
#include "qns/noisegen.hpp"
#include "qns/qsim.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qns {

/// Row r holds (1/pi) int F_Omega over the bands [(l - 1/2) dw, (l + 1/2) dw],
/// l = 1..L, with the first band widened to [0, 3 dw / 2].
struct OverlapMatrix {
  Eigen::MatrixXd values;
  double delta_omega = 0.0;
  Vec modulation; // lambda of each row (rad/s); may be empty

  Index rows() const noexcept { return values.rows(); }
  Index bands() const noexcept { return values.cols(); }
  /// Band centres l dw.
  Vec frequencies() const;
};

struct OverlapOptions {
  int points_per_linewidth = 8; // trapezoid nodes per 2 pi / T; fewer is a GridError
};

Vec overlap_row(const PiecewiseConstantWaveform& w, Index L, double delta_omega, const OverlapOptions& opt = {});

/// Waveforms must share N and dt. Rows are assembled in parallel.
OverlapMatrix overlap_matrix(const std::vector<PiecewiseConstantWaveform>& waveforms, Index L, double delta_omega,
                             const OverlapOptions& opt = {}, Vec modulation = {});

struct NnlsOptions {
  int max_iterations = 0; // 0: 3 n
  double kkt_tol = 1e-10; // relative to |A' y|_inf
};

/// Lawson-Hanson: argmin |A x - y| subject to x >= 0.
Vec nnls(const Eigen::MatrixXd& A, const Vec& y, const NnlsOptions& opt = {});

/// max over i of the KKT violation of x for the NNLS problem, relative to |A' y|_inf.
double nnls_kkt_residual(const Eigen::MatrixXd& A, const Vec& y, const Vec& x);

struct ReconstructionResult {
  Vec frequencies;       // l dw, rad/s
  Vec estimate;          // S_Omega(l dw) >= 0
  double residual_norm = 0.0;
  double condition = 0.0; // sigma_max / sigma_min of the (weighted) matrix
  double min_diagonal_fraction = 0.0; // smallest A_rr / row sum over square part
  Vec truth;             // filled when a true spectrum is supplied
  Vec relative_error;    // (estimate - truth) / truth, per band

  /// Median of |relative_error| over bands with centre below `limit`.
  double median_abs_relative_error(double limit) const;
  /// Median of relative_error (signed) over the same bands.
  double median_relative_error(double limit) const;
};

/// S = nnls(W A, W y). Weights scale rows (e.g. 1 / standard error).
ReconstructionResult reconstruct(const Vec& measurements, const OverlapMatrix& A, const std::optional<Vec>& truth = {},
                                 const std::optional<Vec>& weights = {});

enum class WaveformFamily { dephasing_robust, dpss };

struct QnsDesign {
  WaveformFamily family = WaveformFamily::dephasing_robust;
  Index N = 2000;
  double T = 20e-6;
  Index L = 40;
  double omega_max = mhz(5.0);
  double NW = 1.0;           // Slepian family only
  /// Modulation spacing; 0 means 2 pi / T.
  double delta_omega = 0.0;

  double dw() const noexcept { return delta_omega > 0.0 ? delta_omega : two_pi / T; }
};

/// One waveform per lambda_r = r dw, r = 1..L. Dephasing-robust waveforms use
/// the J0 root whose amplitude is nearest omega_max and need dw T / 2 pi integral.
std::vector<PiecewiseConstantWaveform> qns_waveforms(const QnsDesign& d);

struct QnsRunRecord {
  Vec lambdas;
  std::vector<SurvivalTriple> survival;
  Vec estimator;
  Vec estimator_err;
  ReconstructionResult reconstruction;
};

/// Simulates each row with seed derive_seed(seed, r, 0) and reconstructs.
/// Rows share the seed schedule across families so comparisons use common noise.
QnsRunRecord run_qns(const QnsDesign& d, const SpectrumModel& amp, const SpectrumModel& deph, Index realizations,
                     std::uint64_t seed, const SimulationOptions& sim = {}, const OverlapOptions& ov = {});

/// S_Omega at the band centres, for comparison with a reconstruction.
Vec true_spectrum(const SpectrumModel& amp, const OverlapMatrix& A);

} // namespace qns
