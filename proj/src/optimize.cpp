#include "qns/optimize.hpp"

#include "qns/rng.hpp"

#include <cmath>
#include <limits>

namespace qns {

namespace {

// (e^{x} - 1) / x for imaginary x = i a
cplx phi1(double a) {
  if (std::abs(a) < 1e-4) return {1.0 - a * a / 6.0, 0.5 * a - a * a * a / 24.0};
  return (std::polar(1.0, a) - 1.0) / cplx(0.0, a);
}

// (1/T) int_0^T e^{i Theta} dt, segment-exact
cplx mean_phasor(const Vec& samples, double dt) {
  double theta = 0.0;
  cplx acc = 0.0;
  for (Index m = 0; m < samples.size(); ++m) {
    const double a = samples[m] * dt;
    acc += std::polar(1.0, theta) * phi1(a);
    theta += a;
  }
  return samples.size() ? acc / static_cast<double>(samples.size()) : cplx(0.0);
}

double trapezoid_objective(const FilterFunctionGrid& g, double delta_omega) {
  const Index n = g.omegas.size();
  if (n < 2) return 0.0;
  const double dw = g.omegas[1] - g.omegas[0];
  double acc = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double wt = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    acc += wt * g.values[j] / (g.omegas[j] + delta_omega);
  }
  return acc * dw / pi;
}

double objective_from_samples(const Vec& samples, const DesignProblem& p) {
  const PiecewiseConstantWaveform w(samples, p.dt);
  const double peak = samples.size() ? samples.cwiseAbs().maxCoeff() : 0.0;
  if (peak <= p.omega_max * (1.0 + 1e-12)) return trapezoid_objective(p.grid->evaluate(w), p.delta_omega);
  const Index P = 2 * (p.grid->count() - 1);
  return trapezoid_objective(dephasing_ff_dft(w, P, p.grid->count()), p.delta_omega);
}

void fill_constraints(DesignProblem& p, double eps, std::uint64_t seed) {
  p.basis = modulated_basis(p.dpss, p.omega0, p.dt, p.K());
  p.identity_row = p.basis.colwise().sum().transpose();
  p.reduced_constraints = prune_constraints(amplitude_constraints(p.dpss, p.omega0, p.dt, p.K()), eps, seed);
}

// Reduced coordinates: u = Z y spans the zero-net-rotation subspace.
Eigen::MatrixXd null_space_of(const Vec& g) {
  const Index d = g.size();
  const Eigen::MatrixXd G = g;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  return Q.rightCols(d - 1);
}

struct Lagrangian {
  const DesignProblem& p;
  Eigen::MatrixXd Z;
  Eigen::MatrixXd RZ; // reduced rows in y coordinates
  double T2;
  double barrier;
  Eigen::Vector2d nu = Eigen::Vector2d::Zero();
  double rho = 1.0;

  Vec samples_of(const Vec& y) const { return p.basis * (p.omega_max * (Z * y)); }

  Eigen::Vector2d constraint(const Vec& y) const {
    const cplx z = mean_phasor(samples_of(y), p.dt);
    return {z.real(), z.imag()};
  }

  Vec slack(const Vec& y) const { return Vec::Ones(RZ.rows()) - RZ * y; }

  // objective plus multiplier and penalty terms; defined outside the region too
  double smooth(const Vec& y) const {
    const Vec s = samples_of(y);
    const cplx z = mean_phasor(s, p.dt);
    const Eigen::Vector2d h(z.real(), z.imag());
    return objective_from_samples(s, p) / T2 + nu.dot(h) + 0.5 * rho * h.squaredNorm();
  }

  double value(const Vec& y) const {
    const Vec sl = slack(y);
    if (sl.size() && sl.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    return smooth(y) - barrier * sl.array().log().sum();
  }

  // central differences on the smooth part, exact barrier gradient
  Vec gradient(const Vec& y) const {
    Vec g(y.size());
    for (Index i = 0; i < y.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(y[i]));
      Vec a = y, b = y;
      a[i] += h;
      b[i] -= h;
      g[i] = (smooth(a) - smooth(b)) / (2 * h);
    }
    const Vec sl = slack(y);
    if (sl.size()) g += barrier * (RZ.transpose() * sl.cwiseInverse());
    return g;
  }
};

// BFGS with Armijo backtracking; infeasible trial points evaluate to +inf and are backed off.
Vec minimize_bfgs(const Lagrangian& L, Vec y, int max_iter) {
  const Index n = y.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  double f = L.value(y);
  Vec g = L.gradient(y);
  int stalls = 0;
  for (int it = 0; it < max_iter; ++it) {
    Vec d = -H * g;
    if (g.dot(d) >= 0.0) {
      H.setIdentity();
      d = -g;
    }
    double alpha = 1.0, fn = f;
    Vec yn = y;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      yn = y + alpha * d;
      fn = L.value(yn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * alpha * g.dot(d)) {
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
    const Vec gn = L.gradient(yn);
    const Vec s = yn - y, q = gn - g;
    const double sq = s.dot(q);
    if (sq > 1e-300) {
      if (it == 0) H *= sq / q.squaredNorm();
      const double r = 1.0 / sq;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - r * s * q.transpose()) * H * (I - r * q * s.transpose()) + r * s * s.transpose();
    }
    const double df = f - fn;
    y = yn;
    f = fn;
    g = gn;
    stalls = df <= 1e-15 * std::max(1.0, std::abs(f)) ? stalls + 1 : 0;
    if (stalls >= 3 || g.lpNorm<Eigen::Infinity>() < 1e-13) break;
  }
  return y;
}

} // namespace

DesignProblem make_design_problem(const DesignSettings& s) {
  if (s.N < 2 || !(s.T > 0.0) || s.K < 1) throw ParameterError("design: need N >= 2, T > 0, K >= 1");
  if (!(s.delta_omega > 0.0)) throw ParameterError("design: delta_omega must be positive");
  if (!(s.omega_max > 0.0)) throw ParameterError("design: omega_max must be positive");
  if (s.grid_oversample < 1) throw ParameterError("design: grid_oversample must be >= 1");
  DesignProblem p;
  p.N = s.N;
  p.dt = s.T / static_cast<double>(s.N);
  p.omega0 = s.omega0;
  p.omega_max = s.omega_max;
  p.delta_omega = s.delta_omega;
  p.dpss = dpss(s.N, s.NW / static_cast<double>(s.N), s.K);
  const Index P = s.grid_oversample * s.N;
  p.grid = std::make_shared<DephasingDftPlan>(s.N, p.dt, P, P / 2 + 1, s.omega_max);
  fill_constraints(p, s.eps, s.seed);
  return p;
}

DesignProblem with_modulation(const DesignProblem& base, double omega0, double eps, std::uint64_t seed) {
  DesignProblem p = base;
  p.omega0 = omega0;
  fill_constraints(p, eps, seed);
  return p;
}

double objective_Iz(const WaveformCoefficients& c, const DesignProblem& p) {
  if (c.K() != p.K()) throw ParameterError("objective_Iz: coefficient count does not match the basis");
  return objective_from_samples(p.basis * c.packed(), p);
}

double objective_Iz(const PiecewiseConstantWaveform& w, const DesignProblem& p) {
  if (w.size() != p.N || std::abs(w.dt - p.dt) > 1e-12 * p.dt) throw ParameterError("objective_Iz: waveform grid mismatch");
  return objective_from_samples(w.samples, p);
}

WaveformCoefficients project_onto_family(const PiecewiseConstantWaveform& w, const DesignProblem& p) {
  if (w.size() != p.N) throw ParameterError("project_onto_family: length mismatch");
  Vec u = p.basis.colPivHouseholderQr().solve(w.samples) / p.omega_max;
  const Vec& g = p.identity_row;
  u -= g * (g.dot(u) / g.squaredNorm());
  const double worst = p.reduced_constraints.max_excess(u) + 1.0;
  if (worst > 0.99) u *= 0.99 / worst;
  return WaveformCoefficients::from_packed(p.omega0, p.omega_max * u);
}

DesignReport design_report(const WaveformCoefficients& c, const DesignProblem& p) {
  const Vec s = p.basis * c.packed();
  const double T = p.total_time();
  DesignReport r;
  r.objective = objective_from_samples(s, p);
  r.fz0_over_T2 = std::norm(mean_phasor(s, p.dt));
  r.identity_residual = std::abs(p.dt * s.sum()) / (p.omega_max * T);
  r.peak_over_max = s.cwiseAbs().maxCoeff() / p.omega_max;
  return r;
}

WaveformCoefficients solve_design(const DesignProblem& p, const WaveformCoefficients& init, std::uint64_t seed,
                                  const DesignOptions& opt, DesignReport* report) {
  const Index d = 2 * p.K();
  const Eigen::MatrixXd Z = null_space_of(p.identity_row);
  Lagrangian L{p, Z, p.reduced_constraints.rows * Z, std::pow(p.total_time(), 2), 0.0};

  Vec y;
  if (init.K() == 0) {
    Rng rng(seed);
    Vec dir(d - 1);
    for (Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
    const double reach = p.reduced_constraints.max_excess(Z * dir) + 1.0;
    y = dir * (reach > 0 ? 0.5 / reach : 1.0);
  } else {
    if (init.K() != p.K()) throw ParameterError("solve_design: init has the wrong K");
    Vec u = init.packed() / p.omega_max;
    u -= p.identity_row * (p.identity_row.dot(u) / p.identity_row.squaredNorm());
    const double worst = p.reduced_constraints.max_excess(u) + 1.0;
    if (worst > 0.99) u *= 0.99 / worst;
    y = Z.transpose() * u;
  }

  // barrier weight shrinks by 10 per outer pass down to a floor, both relative to the starting objective
  const double scale = std::max(L.smooth(y), 1e-300);
  const double mu_floor = opt.barrier * scale;
  double mu = std::max(mu_floor, 1e-4 * scale);

  double hprev = L.constraint(y).norm();
  Vec best = y;
  double best_h = std::numeric_limits<double>::infinity();
  int outer = 0;
  for (; outer < opt.max_outer; ++outer) {
    L.barrier = mu;
    y = minimize_bfgs(L, y, opt.max_inner);
    const Eigen::Vector2d h = L.constraint(y);
    if (h.squaredNorm() < opt.fz_tol || h.norm() < best_h) {
      best_h = h.norm();
      best = y;
    }
    if (h.squaredNorm() < opt.fz_tol && mu <= mu_floor) break;
    L.nu += L.rho * h;
    if (h.norm() > 0.25 * hprev) L.rho *= 10.0;
    hprev = h.norm();
    mu = std::max(mu_floor, 0.1 * mu);
  }

  const Vec u = L.Z * best;
  WaveformCoefficients out = WaveformCoefficients::from_packed(p.omega0, p.omega_max * u);
  DesignReport rep = design_report(out, p);
  rep.outer_iterations = outer + 1;
  if (report) *report = rep;
  if (!(rep.fz0_over_T2 < 1e-9)) throw NonConvergenceError("solve_design: F_Z(0) constraint not met", out.packed());
  return out;
}

} // namespace qns
