#include "qns/filterfn.hpp"

#include "qns/fft.hpp"
#include "qns/quadrature.hpp"
#include "qns/waveform.hpp"

#include <cmath>

namespace qns {

namespace {

double sinc(double x) {
  return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
}

// sum_m x_m e^{i w m dt}, phasor recurrence reseeded every 64 steps.
template <class Fn>
cplx phasor_sum(Index n, double w, double dt, Fn&& term) {
  const cplx step = std::polar(1.0, w * dt);
  cplx acc = 0.0, ph = 1.0;
  for (Index m = 0; m < n; ++m) {
    if (m % 64 == 0) ph = std::polar(1.0, w * dt * static_cast<double>(m));
    acc += term(m) * ph;
    ph *= step;
  }
  return acc;
}

// e^{i Theta} at segment midpoints.
CVec midpoint_phases(const PiecewiseConstantWaveform& w) {
  const Vec th = rotation_angle(w);
  CVec e(w.size());
  for (Index m = 0; m < w.size(); ++m) e[m] = std::polar(1.0, 0.5 * (th[m] + th[m + 1]));
  return e;
}

// int_{-1}^{1} s^p e^{i theta s} ds by its power series in theta.
cplx moment_integral(int p, double theta) {
  cplx acc = 0.0, term = 1.0; // (i theta)^n / n!
  for (int n = 0; n < 200; ++n) {
    if ((p + n) % 2 == 0) acc += term * (2.0 / (p + n + 1));
    term *= cplx(0.0, theta) / static_cast<double>(n + 1);
    if (std::abs(term) < 1e-18 && n > std::abs(theta) + 2) break;
  }
  return acc;
}

Index default_count(Index P, Index count) {
  if (P < 1) throw ParameterError("dft filter function: padded length must be positive");
  if (count < 0) return P / 2 + 1;
  if (count > P) throw ParameterError("dft filter function: count exceeds padded length");
  return count;
}

// Fold a length-N sequence into P bins (m mod P) so the DFT sum is exact for any P.
CVec fold(const CVec& x, Index P) {
  CVec y = CVec::Zero(P);
  for (Index m = 0; m < x.size(); ++m) y[m % P] += x[m];
  return y;
}

} // namespace

FilterFunctionGrid amplitude_ff(const PiecewiseConstantWaveform& w, const Vec& omegas) {
  FilterFunctionGrid g{omegas, Vec(omegas.size()), w.total_time()};
  for (Index j = 0; j < omegas.size(); ++j) {
    const double om = omegas[j];
    const cplx s = phasor_sum(w.size(), om, w.dt, [&](Index m) { return cplx(w.samples[m]); });
    const double k = w.dt * sinc(0.5 * om * w.dt);
    g.values[j] = 0.25 * k * k * std::norm(s);
  }
  return g;
}

FilterFunctionGrid dephasing_ff(const PiecewiseConstantWaveform& w, const Vec& omegas) {
  const CVec e = midpoint_phases(w);
  FilterFunctionGrid g{omegas, Vec(omegas.size()), w.total_time()};
  const double h = 0.5 * w.dt;
  for (Index j = 0; j < omegas.size(); ++j) {
    const double om = omegas[j];
    const cplx ap = phasor_sum(w.size(), om, w.dt, [&](Index m) { return e[m] * sinc(h * (om + w.samples[m])); });
    const cplx am = phasor_sum(w.size(), om, w.dt, [&](Index m) { return std::conj(e[m]) * sinc(h * (om - w.samples[m])); });
    g.values[j] = 0.5 * w.dt * w.dt * (std::norm(ap) + std::norm(am));
  }
  return g;
}

FilterFunctionGrid amplitude_ff_dft(const PiecewiseConstantWaveform& w, Index P, Index count) {
  count = default_count(P, count);
  const CVec X = dft_backward(fold(w.samples.cast<cplx>(), P));
  const double dw = two_pi / (static_cast<double>(P) * w.dt);
  FilterFunctionGrid g{Vec(count), Vec(count), w.total_time()};
  for (Index j = 0; j < count; ++j) {
    const double om = dw * static_cast<double>(j);
    const double k = w.dt * sinc(0.5 * om * w.dt);
    g.omegas[j] = om;
    g.values[j] = 0.25 * k * k * std::norm(X[j]);
  }
  return g;
}

DephasingDftPlan::DephasingDftPlan(Index N, double dt, Index P, Index count, double max_abs_omega)
    : N_(N), P_(P), count_(default_count(P, count)), dt_(dt) {
  if (N < 1 || !(dt > 0.0)) throw ParameterError("dephasing plan: need N >= 1 and dt > 0");
  const double half = 0.5 * dt;
  const double amax = half * max_abs_omega;
  // Expand e^{i Omega_m v} on each segment (|v| <= dt/2) until terms drop below 1e-17.
  pmax_ = 0;
  for (double t = 1.0; pmax_ < 60; ++pmax_) {
    t *= amax / (pmax_ + 1);
    if (t < 1e-17) break;
  }
  const double dw = two_pi / (static_cast<double>(P) * dt);
  plus_.resize(pmax_ + 1, count_);
  minus_.resize(pmax_ + 1, count_);
  for (int p = 0; p <= pmax_; ++p) {
    const double hp = std::pow(half, p + 1);
    for (Index j = 0; j < count_; ++j) {
      const double th = half * dw * static_cast<double>(j);
      plus_(p, j) = hp * moment_integral(p, th);
      minus_(p, j) = hp * moment_integral(p, -th);
    }
  }
}

FilterFunctionGrid DephasingDftPlan::evaluate(const PiecewiseConstantWaveform& w) const {
  if (w.size() != N_ || std::abs(w.dt - dt_) > 1e-12 * dt_) throw ParameterError("dephasing plan: waveform grid mismatch");
  const double amax = 0.5 * dt_ * (N_ ? w.samples.cwiseAbs().maxCoeff() : 0.0);
  double tail = 1.0;
  for (int p = 1; p <= pmax_ + 1; ++p) tail *= amax / p;
  if (tail > 1e-15) throw ParameterError("dephasing plan: waveform exceeds the planned amplitude");

  const CVec e = midpoint_phases(w);
  CVec plus = CVec::Zero(count_), minus = CVec::Zero(count_);
  CVec cur = e;
  for (int p = 0; p <= pmax_; ++p) {
    if (p > 0)
      for (Index m = 0; m < N_; ++m) cur[m] *= cplx(0.0, w.samples[m]) / static_cast<double>(p);
    const CVec X = dft_backward(fold(cur, P_));
    for (Index j = 0; j < count_; ++j) {
      plus[j] += plus_(p, j) * X[j];
      minus[j] += minus_(p, j) * X[(P_ - j) % P_];
    }
  }
  const double dw = two_pi / (static_cast<double>(P_) * dt_);
  FilterFunctionGrid g{Vec(count_), Vec(count_), w.total_time()};
  for (Index j = 0; j < count_; ++j) {
    g.omegas[j] = dw * static_cast<double>(j);
    g.values[j] = 0.5 * (std::norm(plus[j]) + std::norm(minus[j]));
  }
  return g;
}

FilterFunctionGrid dephasing_ff_dft(const PiecewiseConstantWaveform& w, Index P, Index count) {
  const double amax = w.size() ? w.samples.cwiseAbs().maxCoeff() : 0.0;
  return DephasingDftPlan(w.size(), w.dt, P, count, amax).evaluate(w);
}

double fejer_factor(int M, double x) {
  const double k = std::round(x / pi);
  const double y = x - k * pi;
  const double m = static_cast<double>(M);
  if (std::abs(y) < 1e-4) return m * m * (1.0 - (m * m - 1.0) * y * y / 3.0);
  const double r = std::sin(m * y) / std::sin(y);
  return r * r;
}

std::pair<cplx, cplx> single_period_integrals(double lambda, double omega0, double omega) {
  const double a = omega0 / lambda;
  const double tau = two_pi / lambda;
  AdaptiveOptions opt;
  opt.abs_tol = 1e-15 * tau;
  opt.rel_tol = 1e-13;
  auto theta = [&](double t) { return a * (1.0 - std::cos(lambda * t)); };
  const cplx c = integrate_adaptive_c([&](double t) { return std::cos(theta(t)) * std::polar(1.0, omega * t); }, 0.0, tau, opt);
  const cplx s = integrate_adaptive_c([&](double t) { return std::sin(theta(t)) * std::polar(1.0, omega * t); }, 0.0, tau, opt);
  return {c, s};
}

FilterFunctionGrid dephasing_ff_periodic_oracle(int M, double lambda, double omega0, const Vec& omegas) {
  if (M < 1 || !(lambda > 0.0)) throw ParameterError("periodic oracle: need M >= 1 and lambda > 0");
  FilterFunctionGrid g{omegas, Vec(omegas.size()), M * two_pi / lambda};
  for (Index j = 0; j < omegas.size(); ++j) {
    const auto [c, s] = single_period_integrals(lambda, omega0, omegas[j]);
    g.values[j] = (std::norm(c) + std::norm(s)) * fejer_factor(M, pi * omegas[j] / lambda);
  }
  return g;
}

double dephasing_robust_amplitude_ff_closed_form(double omega0, double lambda, double T, double omega) {
  const double d = omega * omega - lambda * lambda;
  if (std::abs(d) < 1e-9 * lambda * lambda) return std::pow(omega0 * T / 4.0, 2);
  const double v = omega0 * lambda * std::sin(0.5 * omega * T) / d;
  return v * v;
}

} // namespace qns
