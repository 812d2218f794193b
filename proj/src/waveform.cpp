#include "qns/waveform.hpp"

#include <cmath>

namespace qns {

PiecewiseConstantWaveform::PiecewiseConstantWaveform(Vec s, double step) : samples(std::move(s)), dt(step) {
  if (!(dt > 0.0)) throw ParameterError("waveform: dt must be positive");
}

bool PiecewiseConstantWaveform::identity_gate() const {
  return std::abs(net_rotation()) < 1e-9 * std::max(1.0, dt * samples.cwiseAbs().sum());
}

Vec WaveformCoefficients::packed() const {
  Vec x(2 * K());
  x << cos_coeffs, sin_coeffs;
  return x;
}

WaveformCoefficients WaveformCoefficients::from_packed(double omega0, const Vec& x) {
  if (x.size() % 2 != 0 || x.size() == 0) throw ParameterError("coefficients: packed length must be even and positive");
  const Index k = x.size() / 2;
  return {omega0, x.head(k), x.tail(k)};
}

namespace {

double sinc(double x) {
  return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
}

// Real part of e^{-i c} * integral of e^{i Theta} for Omega0 sin(m x) samples.
// Segment m has midpoint angle c (1 - cos m x) with c = Omega0 dt cos(x/2) / (2 sin(x/2)).
double dc_dephasing_projection(double omega0, double x, Index N, double dt) {
  const double c = omega0 * dt * std::cos(0.5 * x) / (2.0 * std::sin(0.5 * x));
  double acc = 0.0;
  for (Index m = 0; m < N; ++m) {
    const double s = std::sin(x * m), co = std::cos(x * m);
    acc += std::cos(c * co) * sinc(0.5 * omega0 * dt * s);
  }
  return acc * dt;
}

void check_dr(double T, int M, int root_index, Index N) {
  if (M <= 0) throw ParameterError("dephasing_robust: M must be positive");
  if (root_index <= 0) throw ParameterError("dephasing_robust: root index must be positive");
  if (N < 2 || 2 * M > N) throw ParameterError("dephasing_robust: need M <= N/2");
  if (!(T > 0.0)) throw ParameterError("dephasing_robust: T must be positive");
}

} // namespace

double dephasing_robust_amplitude(double T, int M, int root_index, Index N, bool polish) {
  check_dr(T, M, root_index, N);
  const double lambda = two_pi * M / T;
  const double nominal = lambda * bessel_j0_roots(root_index)[root_index - 1];
  if (!polish) return nominal;

  const double dt = T / static_cast<double>(N);
  const double x = two_pi * M / static_cast<double>(N);
  double lo = nominal - 0.35 * lambda, hi = nominal + 0.35 * lambda;
  double flo = dc_dephasing_projection(lo, x, N, dt);
  const double fhi = dc_dephasing_projection(hi, x, N, dt);
  if ((flo < 0) == (fhi < 0)) return nominal;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = dc_dephasing_projection(mid, x, N, dt);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PiecewiseConstantWaveform dephasing_robust(double T, int M, int root_index, Index N, bool polish) {
  const double omega0 = dephasing_robust_amplitude(T, M, root_index, N, polish);
  const double x = two_pi * M / static_cast<double>(N);
  Vec s(N);
  for (Index m = 0; m < N; ++m) s[m] = omega0 * std::sin(x * m);
  return {std::move(s), T / static_cast<double>(N)};
}

PiecewiseConstantWaveform modulated_dpss_waveform(Index N, double W, double amp_max, double lambda,
                                                  double dt) {
  if (N < 2) throw ParameterError("modulated_dpss_waveform: N must be >= 2");
  if (!(dt > 0.0) || !(amp_max >= 0.0)) throw ParameterError("modulated_dpss_waveform: bad dt or amplitude");
  if (W * static_cast<double>(N) < 1.0 - 1e-12) throw ParameterError("modulated_dpss_waveform: need N W >= 1");
  const double T = dt * static_cast<double>(N);
  const double cycles = lambda * T / two_pi;
  if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, std::abs(cycles)))
    throw ParameterError("modulated_dpss_waveform: lambda must be a multiple of 2 pi / T");

  const DpssSet d = dpss(N + 1, W, 1);
  Vec v = d.sequences.row(0).head(N).transpose();
  v /= v.maxCoeff();
  const double x = two_pi * std::round(cycles) / static_cast<double>(N);
  Vec s(N);
  for (Index m = 0; m < N; ++m) s[m] = amp_max * v[m] * std::sin(x * m);
  return {std::move(s), dt};
}

Eigen::MatrixXd modulated_basis(const DpssSet& d, double omega0, double dt, Index K) {
  if (K < 1 || K > d.K()) throw ParameterError("modulated_basis: K exceeds the Slepian set");
  const Index N = d.N;
  Eigen::MatrixXd B(N, 2 * K);
  for (Index m = 0; m < N; ++m) {
    const double c = std::cos(omega0 * dt * m), s = std::sin(omega0 * dt * m);
    for (Index k = 0; k < K; ++k) {
      B(m, k) = c * d.sequences(k, m);
      B(m, k + K) = s * d.sequences(k, m);
    }
  }
  return B;
}

PiecewiseConstantWaveform synthesize(const WaveformCoefficients& c, const DpssSet& d, double dt) {
  if (c.sin_coeffs.size() != c.K() || c.K() < 1) throw ParameterError("synthesize: coefficient size mismatch");
  if (d.K() < c.K()) throw ParameterError("synthesize: Slepian set has fewer sequences than coefficients");
  const Eigen::MatrixXd B = modulated_basis(d, c.omega0, dt, c.K());
  return {B * c.packed(), dt};
}

Vec rotation_angle(const PiecewiseConstantWaveform& w) {
  Vec theta(w.size() + 1);
  theta[0] = 0.0;
  double sum = 0.0, comp = 0.0; // Neumaier
  for (Index i = 0; i < w.size(); ++i) {
    const double v = w.dt * w.samples[i];
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
    theta[i + 1] = sum + comp;
  }
  return theta;
}

} // namespace qns
