#include "qns/slepian.hpp"

#include "qns/fft.hpp"
#include "qns/filterfn.hpp"
#include "qns/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qns {

namespace {

// Tridiagonal matrix that commutes with the sinc kernel.
struct Tridiagonal {
  Vec diag;
  Vec off; // off[i] couples i and i+1

  explicit Tridiagonal(Index N, double W) : diag(N), off(N > 1 ? N - 1 : 0) {
    const double c = std::cos(two_pi * W);
    for (Index n = 0; n < N; ++n) {
      const double h = 0.5 * static_cast<double>(N - 1 - 2 * n);
      diag[n] = h * h * c;
    }
    for (Index n = 1; n < N; ++n) off[n - 1] = 0.5 * static_cast<double>(n) * static_cast<double>(N - n);
  }

  Index size() const { return diag.size(); }

  // Number of eigenvalues strictly below x (Sturm sequence via LDL').
  Index count_below(double x) const {
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    Index neg = 0;
    double d = diag[0] - x;
    if (d == 0.0) d = -tiny;
    if (d < 0) ++neg;
    for (Index i = 1; i < size(); ++i) {
      d = (diag[i] - x) - off[i - 1] * off[i - 1] / d;
      if (d == 0.0) d = -tiny;
      if (d < 0) ++neg;
    }
    return neg;
  }

  // i-th smallest eigenvalue by bisection.
  double eigenvalue(Index i) const {
    double lo = std::numeric_limits<double>::max(), hi = -lo;
    for (Index n = 0; n < size(); ++n) {
      const double r = (n > 0 ? std::abs(off[n - 1]) : 0.0) + (n + 1 < size() ? std::abs(off[n]) : 0.0);
      lo = std::min(lo, diag[n] - r);
      hi = std::max(hi, diag[n] + r);
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (count_below(mid) <= i) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  // Solve (T - s I) y = b by Gaussian elimination with partial pivoting.
  Vec solve_shifted(double s, const Vec& b) const {
    const Index n = size();
    Vec d = diag.array() - s;
    Vec u1 = Vec::Zero(n), u2 = Vec::Zero(n);
    u1.head(n - 1) = off;
    Vec y = b;
    const double eps = std::numeric_limits<double>::epsilon() *
                       (diag.cwiseAbs().maxCoeff() + off.cwiseAbs().maxCoeff() + 1.0);
    for (Index i = 0; i + 1 < n; ++i) {
      const double l = off[i];
      if (std::abs(l) > std::abs(d[i])) {
        const double di = d[i], u1i = u1[i];
        d[i] = l;
        u1[i] = d[i + 1];
        u2[i] = u1[i + 1];
        std::swap(y[i], y[i + 1]);
        const double f = di / l;
        d[i + 1] = u1i - f * u1[i];
        u1[i + 1] = -f * u2[i];
        y[i + 1] -= f * y[i];
      } else {
        if (d[i] == 0.0) d[i] = eps;
        const double f = l / d[i];
        d[i + 1] -= f * u1[i];
        y[i + 1] -= f * y[i];
      }
    }
    if (d[n - 1] == 0.0) d[n - 1] = eps;
    Vec x(n);
    for (Index i = n - 1; i >= 0; --i) {
      double acc = y[i];
      if (i + 1 < n) acc -= u1[i] * x[i + 1];
      if (i + 2 < n) acc -= u2[i] * x[i + 2];
      x[i] = acc / d[i];
    }
    return x;
  }
};

void fix_sign(Eigen::Ref<Vec> v) {
  const double cut = 1e-8 * v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > cut) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

} // namespace

DpssSet dpss(Index N, double W, Index K) {
  if (!(W > 0.0 && W < 0.5)) throw ParameterError("dpss: W must lie in (0, 1/2)");
  if (N < 1 || K < 1 || K > N) throw ParameterError("dpss: need 1 <= K <= N");

  DpssSet out;
  out.N = N;
  out.W = W;
  out.sequences.resize(K, N);
  out.eigenvalues.resize(K);

  if (N == 1) {
    out.sequences(0, 0) = 1.0;
    out.eigenvalues[0] = 2.0 * W;
    return out;
  }

  const Tridiagonal t(N, W);
  Vec start(N);
  for (Index n = 0; n < N; ++n) start[n] = 1.0 + 0.5 * std::sin(0.7 * n + 0.3) + 0.25 * std::cos(1.9 * n);

  for (Index k = 0; k < K; ++k) {
    const double theta = t.eigenvalue(N - 1 - k);
    const double scale = std::max(1.0, std::abs(theta));
    const double shift = theta + 4.0 * std::numeric_limits<double>::epsilon() * scale;
    Vec v = start.normalized();
    for (int it = 0; it < 4; ++it) {
      v = t.solve_shifted(shift, v);
      for (Index j = 0; j < k; ++j) v -= out.sequences.row(j).dot(v) * out.sequences.row(j).transpose();
      v.normalize();
    }
    fix_sign(v);
    out.sequences.row(k) = v.transpose();
    out.eigenvalues[k] = sinc_kernel_quadratic_form(v, W);
  }
  return out;
}

double sinc_kernel_quadratic_form(const Vec& v, double W) {
  const Index n = v.size();
  if (n == 0) return 0.0;
  const Index p = fast_fft_size(2 * n);
  CVec x = CVec::Zero(p);
  x.head(n) = v.cast<cplx>();
  CVec f = dft_forward(x);
  CVec pw = f.cwiseAbs2().cast<cplx>();
  CVec r = dft_backward(pw) / static_cast<double>(p);
  double acc = 2.0 * W * r[0].real();
  for (Index tau = 1; tau < n; ++tau)
    acc += 2.0 * std::sin(two_pi * W * tau) / (pi * tau) * r[tau].real();
  return acc;
}

double spectral_concentration(const PiecewiseConstantWaveform& w, double band_center,
                              double band_halfwidth) {
  const double energy = w.samples.squaredNorm();
  if (!(energy > 0.0)) throw UndefinedRatioError("spectral_concentration: zero waveform");
  if (!(band_halfwidth >= 0.0)) throw ParameterError("spectral_concentration: negative halfwidth");
  if (std::isinf(band_halfwidth)) return 1.0;

  const double total = 0.5 * pi * w.dt * energy;
  const double lo = std::max(0.0, std::abs(band_center) - band_halfwidth);
  const double hi = std::abs(band_center) + band_halfwidth;
  if (hi <= lo) return 0.0;

  // eight 8-point panels per Fejer linewidth
  const double linewidth = two_pi / w.total_time();
  const int panels = std::max(8, static_cast<int>(std::ceil(8.0 * (hi - lo) / linewidth)));
  const GaussRule rule = gauss_legendre(8);
  Vec nodes(static_cast<Index>(panels) * 8);
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < 8; ++i) nodes[p * 8 + i] = lo + (p + 0.5) * h + 0.5 * h * rule.nodes[i];
  const Vec f = amplitude_ff(w, nodes).values;
  double inside = 0.0;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < 8; ++i) inside += 0.5 * h * rule.weights[i] * f[p * 8 + i];
  return std::clamp(2.0 * inside / total, 0.0, 1.0);
}

} // namespace qns
