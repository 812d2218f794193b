#include "doctest.h"

#include "qns/optimize.hpp"
#include "qns/quadrature.hpp"

#include <cmath>

using namespace qns;

namespace {

DesignSettings small_settings() {
  DesignSettings s;
  s.N = 2000;
  return s;
}

const DesignProblem& small_problem() {
  static const DesignProblem p = make_design_problem(small_settings());
  return p;
}

double normalized_distance(const Vec& a, const Vec& b) {
  return std::min((a - b).norm(), (a + b).norm()) / b.norm();
}

const WaveformCoefficients& dr_start_solution(DesignReport* report = nullptr) {
  static DesignReport rep;
  static const WaveformCoefficients c = [] {
    const auto& p = small_problem();
    const auto dr = dephasing_robust(p.total_time(), 10, 1, p.N);
    return solve_design(p, project_onto_family(dr, p), 1, {}, &rep);
  }();
  if (report) *report = rep;
  return c;
}

} // namespace

TEST_CASE("free evolution objective against adaptive quadrature") {
  const auto& p = small_problem();
  const double T = p.total_time();
  const double dw = p.delta_omega;
  const WaveformCoefficients zero{p.omega0, Vec::Zero(p.K()), Vec::Zero(p.K())};
  const double got = objective_Iz(zero, p);

  auto f = [&](double w) {
    const double s = w * T < 1e-6 ? T * T : std::pow(2.0 * std::sin(0.5 * w * T) / w, 2);
    return s / (w + dw);
  };
  const double nyq = pi / p.dt;
  const double period = two_pi / T;
  double ref = 0.0;
  for (double a = 0.0; a < nyq; a += 10 * period) ref += integrate_adaptive(f, a, std::min(nyq, a + 10 * period));
  ref /= pi;
  CHECK(got == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("dephasing-robust beats the plain Slepian at the same modulation") {
  const auto& p = small_problem();
  const auto dr = dephasing_robust(p.total_time(), 10, 1, p.N);
  const auto c_dr = project_onto_family(dr, p);
  WaveformCoefficients c_sl{p.omega0, Vec::Zero(p.K()), Vec::Zero(p.K())};
  c_sl.sin_coeffs[0] = 1.0;
  const double peak = (p.basis * c_sl.packed()).cwiseAbs().maxCoeff();
  c_sl.sin_coeffs[0] = dr.samples.cwiseAbs().maxCoeff() / peak;
  CHECK(objective_Iz(c_dr, p) < 0.5 * objective_Iz(c_sl, p));
  CHECK(objective_Iz(dr, p) < objective_Iz(c_sl, p));
}

TEST_CASE("objective is unchanged by time reversal") {
  const auto& p = small_problem();
  const auto dr = dephasing_robust(p.total_time(), 10, 2, p.N);
  PiecewiseConstantWaveform rev(dr.samples.reverse(), dr.dt);
  CHECK(objective_Iz(rev, p) == doctest::Approx(objective_Iz(dr, p)).epsilon(1e-10));
}

TEST_CASE("design from the dephasing-robust start") {
  const auto& p = small_problem();
  const auto dr = dephasing_robust(p.total_time(), 10, 1, p.N);
  const auto init = project_onto_family(dr, p);
  DesignReport rep;
  const auto c = dr_start_solution(&rep);
  const Vec w = p.basis * c.packed();
  CHECK(rep.fz0_over_T2 < 1e-9);
  CHECK(rep.identity_residual < 1e-9);
  CHECK(rep.peak_over_max <= 1.0);
  CHECK(p.reduced_constraints.max_excess(c.packed() / p.omega_max) <= 0.0);
  // every original sample bound, not only the retained rows
  CHECK(w.cwiseAbs().maxCoeff() <= p.omega_max);
  CHECK(rep.objective < objective_Iz(init, p));
  // the K = 3 optimum is within 1% of the unrestricted analytic waveform's objective
  CHECK(rep.objective == doctest::Approx(objective_Iz(dr, p)).epsilon(0.01));
}

TEST_CASE("design from a sine-modulated Slepian start lands on the same waveform") {
  const auto& p = small_problem();
  const auto start = modulated_dpss_waveform(p.N, 1.0 / p.N, mhz(0.3), p.omega0, p.dt);
  const auto c = solve_design(p, project_onto_family(start, p), 1);
  const Vec ref = p.basis * dr_start_solution().packed();
  CHECK(normalized_distance(p.basis * c.packed(), ref) < 1e-3);
}

TEST_CASE("design from a random feasible start still meets every constraint") {
  const auto& p = small_problem();
  DesignReport rep;
  const auto c = solve_design(p, WaveformCoefficients{}, 5, {}, &rep);
  CHECK(c.K() == p.K());
  CHECK(rep.fz0_over_T2 < 1e-9);
  CHECK(rep.identity_residual < 1e-9);
  CHECK(rep.peak_over_max <= 1.0);
}

TEST_CASE("starved solver reports its best iterate") {
  const auto& p = small_problem();
  DesignOptions opt;
  opt.max_outer = 1;
  opt.max_inner = 1;
  try {
    solve_design(p, WaveformCoefficients{}, 5, opt);
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.best_iterate().size() == 2 * p.K());
  }
}

TEST_CASE("bad design settings") {
  DesignSettings s = small_settings();
  s.delta_omega = 0.0;
  CHECK_THROWS_AS(make_design_problem(s), ParameterError);
  s = small_settings();
  s.K = 0;
  CHECK_THROWS_AS(make_design_problem(s), ParameterError);
}

TEST_CASE("short sweep over modulation frequencies") {
  const auto& base = small_problem();
  const double T = base.total_time();
  for (int M : {1, 40, 150}) {
    const auto p = with_modulation(base, two_pi * M / T, 0.10, 1);
    DesignReport rep;
    const auto dr = dephasing_robust(T, M, 1, p.N);
    solve_design(p, project_onto_family(dr, p), 1, {}, &rep);
    CHECK(rep.fz0_over_T2 < 1e-9);
    CHECK(rep.peak_over_max <= 1.0);
  }
}
