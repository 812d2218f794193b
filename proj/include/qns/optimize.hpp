#pragma once

#include "qns/filterfn.hpp"
#include "qns/lp_reduce.hpp"
#include "qns/waveform.hpp"

#include <cstdint>
#include <memory>

namespace qns {

struct DesignSettings {
  Index N = 20000;
  double T = 100e-6;
  double NW = 1.0;
  Index K = 3;
  double omega0 = mhz(0.1);
  double omega_max = mhz(5.0);
  double eps = 0.10;             // pruning tolerance
  std::uint64_t seed = 1;        // pruning shuffles
  double delta_omega = two_pi * 1e3;
  Index grid_oversample = 4;     // objective grid spacing 2 pi / (oversample T)
};

/// Everything the objective and the constraints need for one modulation frequency.
/// reduced_constraints act on u = x / omega_max with x packed as in WaveformCoefficients.
struct DesignProblem {
  DpssSet dpss;
  double omega0 = 0.0;
  double dt = 0.0;
  Index N = 0;
  double omega_max = 0.0;
  double delta_omega = 0.0;
  Eigen::MatrixXd basis;            // N x 2K, modulated Slepians
  Vec identity_row;                 // basis column sums: identity_row . x = sum_m Omega_m
  AffineConstraintSet reduced_constraints;
  std::shared_ptr<const DephasingDftPlan> grid;

  double total_time() const noexcept { return static_cast<double>(N) * dt; }
  Index K() const noexcept { return dpss.K(); }
};

DesignProblem make_design_problem(const DesignSettings& s);

/// Same Slepians and grid, new modulation frequency (re-prunes the constraints).
DesignProblem with_modulation(const DesignProblem& base, double omega0, double eps, std::uint64_t seed);

/// (1/pi) int_0^{pi/dt} F_Z(w) / (w + delta_omega) dw by the trapezoid rule on the design grid.
double objective_Iz(const WaveformCoefficients& c, const DesignProblem& p);
double objective_Iz(const PiecewiseConstantWaveform& w, const DesignProblem& p);

/// Least-squares fit of a sampled waveform in the modulated basis, with the
/// net rotation removed and the result pulled inside the reduced region.
WaveformCoefficients project_onto_family(const PiecewiseConstantWaveform& w, const DesignProblem& p);

struct DesignOptions {
  int max_outer = 40;
  int max_inner = 300;
  double fz_tol = 1e-12;       // target F_Z(0) / T^2
  double barrier = 1e-10;      // log-barrier weight on the reduced rows, relative to the objective
};

struct DesignReport {
  double objective = 0.0;        // I_z
  double fz0_over_T2 = 0.0;
  double identity_residual = 0.0; // |dt sum Omega_m| / (omega_max T)
  double peak_over_max = 0.0;     // max_m |Omega_m| / omega_max over all samples
  int outer_iterations = 0;
};

DesignReport design_report(const WaveformCoefficients& c, const DesignProblem& p);

/// Minimizes objective_Iz under the reduced amplitude rows, zero net rotation
/// and F_Z(0) = 0. An empty init (K() == 0) starts from a random feasible point.
/// Throws NonConvergenceError (best packed coefficients attached) if F_Z(0)
/// stays above 1e-9 T^2.
WaveformCoefficients solve_design(const DesignProblem& p, const WaveformCoefficients& init, std::uint64_t seed,
                                  const DesignOptions& opt = {}, DesignReport* report = nullptr);

} // namespace qns
