#include "qns/noisegen.hpp"

#include "qns/fft.hpp"
#include "qns/quadrature.hpp"
#include "qns/rng.hpp"

#include <algorithm>
#include <cmath>

namespace qns {

SpectrumModel SpectrumModel::flat(double a_omega, double omega_h) {
  SpectrumModel m;
  m.kind = SpectrumKind::flat_cutoff;
  m.a_omega = a_omega;
  m.omega_h = omega_h;
  m.validate();
  return m;
}

SpectrumModel SpectrumModel::one_over_f(double c, double a_z, double omega_l, double omega_h) {
  SpectrumModel m;
  m.kind = SpectrumKind::one_over_f;
  m.c = c;
  m.a_z = a_z;
  m.omega_l = omega_l;
  m.omega_h = omega_h;
  m.validate();
  return m;
}

SpectrumModel SpectrumModel::detuning(double mu) {
  SpectrumModel m;
  m.kind = SpectrumKind::dc_delta;
  m.mu = mu;
  return m;
}

SpectrumModel SpectrumModel::none() { return SpectrumModel{}; }

void SpectrumModel::validate() const {
  switch (kind) {
  case SpectrumKind::flat_cutoff:
    if (!(a_omega >= 0.0)) throw ParameterError("spectrum: a_omega must be >= 0");
    if (a_omega > 0.0 && !(omega_h > 0.0)) throw ParameterError("spectrum: omega_h must be > 0");
    break;
  case SpectrumKind::one_over_f:
    if (!(c >= 0.0) || !(a_z >= 0.0)) throw ParameterError("spectrum: c and a_z must be >= 0");
    if (!(omega_l > 0.0) || !(omega_h > omega_l)) throw ParameterError("spectrum: need 0 < omega_l < omega_h");
    break;
  case SpectrumKind::dc_delta:
    if (!std::isfinite(mu)) throw ParameterError("spectrum: mu must be finite");
    break;
  }
}

bool SpectrumModel::silent() const {
  switch (kind) {
  case SpectrumKind::flat_cutoff: return a_omega == 0.0;
  case SpectrumKind::one_over_f: return c * a_z == 0.0;
  case SpectrumKind::dc_delta: return mu == 0.0;
  }
  return true;
}

std::vector<double> SpectrumModel::breakpoints() const {
  switch (kind) {
  case SpectrumKind::flat_cutoff: return {omega_h};
  case SpectrumKind::one_over_f: return {omega_l, omega_h};
  case SpectrumKind::dc_delta: return {};
  }
  return {};
}

double psd_eval(const SpectrumModel& m, double omega) {
  if (omega < 0.0) throw ParameterError("psd_eval: omega must be >= 0");
  switch (m.kind) {
  case SpectrumKind::flat_cutoff: return omega <= m.omega_h ? m.a_omega : 0.0;
  case SpectrumKind::one_over_f:
    if (omega <= m.omega_l) return m.c * m.a_z / m.omega_l;
    if (omega <= m.omega_h) return m.c * m.a_z / omega;
    return 0.0;
  case SpectrumKind::dc_delta: return 0.0;
  }
  return 0.0;
}

double process_variance(const SpectrumModel& m) {
  switch (m.kind) {
  case SpectrumKind::flat_cutoff: return m.a_omega * m.omega_h / pi;
  case SpectrumKind::one_over_f: return m.c * m.a_z * (1.0 + std::log(m.omega_h / m.omega_l)) / pi;
  case SpectrumKind::dc_delta: return 0.0;
  }
  return 0.0;
}

NoiseRealization sample_process(const SpectrumModel& m, Index N, double dt, std::uint64_t seed, std::uint64_t index,
                                const SamplingOptions& opt) {
  if (N < 1 || !(dt > 0.0)) throw ParameterError("sample_process: need N >= 1 and dt > 0");
  if (opt.oversample < 1) throw ParameterError("sample_process: oversample must be >= 1");
  m.validate();
  if (m.cutoff() > pi / dt) throw ParameterError("sample_process: spectrum extends past the Nyquist frequency");

  NoiseRealization r{Vec::Constant(N, m.kind == SpectrumKind::dc_delta ? m.mu : 0.0), m.kind == SpectrumKind::dc_delta ? m.mu : 0.0, seed, index};
  if (m.kind == SpectrumKind::dc_delta || m.silent()) return r;

  const Index L = fast_fft_size(opt.oversample * N);
  const double dw = two_pi / (static_cast<double>(L) * dt);
  Rng rng(derive_seed(seed, index, opt.stream));
  CVec spec = CVec::Zero(L);
  for (Index j = 1; j <= L / 2; ++j) {
    const double a = rng.normal(), b = rng.normal();
    const double s = psd_eval(m, dw * static_cast<double>(j));
    if (s > 0.0) spec[j] = std::sqrt(s * dw / pi) * cplx(a, -b);
  }
  const CVec x = dft_backward(spec);
  for (Index n = 0; n < N; ++n) r.samples[n] += x[n].real();
  return r;
}

double free_decay_exponent(const SpectrumModel& m, double T) {
  if (m.kind == SpectrumKind::dc_delta) return m.mu * m.mu * T * T;
  if (m.silent() || T <= 0.0) return 0.0;
  auto f = [&](double w) {
    const double x = 0.5 * w * T;
    const double s = std::abs(x) < 1e-8 ? T * T : std::pow(std::sin(x) / (0.5 * w), 2);
    return psd_eval(m, w) * s;
  };
  // panels of a few oscillation periods, split at the spectrum's kinks
  std::vector<double> edges{0.0};
  const double step = 8.0 * two_pi / T;
  for (double b : m.breakpoints()) {
    for (double a = edges.back() + step; a < b; a += step) edges.push_back(a);
    edges.push_back(b);
  }
  AdaptiveOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) acc += integrate_adaptive(f, edges[i - 1], edges[i], opt);
  return acc / pi;
}

double t2_estimate(const SpectrumModel& m, double t_max) {
  if (!m.dephasing_kind()) throw ModelTypeError("t2_estimate: needs a dephasing spectrum");
  if (!(t_max > 0.0)) throw ParameterError("t2_estimate: t_max must be positive");
  constexpr double level = 0.5;
  if (free_decay_exponent(m, t_max) < level) return std::numeric_limits<double>::infinity();
  // chi grows monotonically in T
  double lo = 0.0, hi = t_max;
  for (int i = 0; i < 100 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (free_decay_exponent(m, mid) < level) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace qns
