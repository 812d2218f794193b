#include "qns/quadrature.hpp"

#include <cmath>
#include <queue>

namespace qns {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw ParameterError("gauss_legendre: n must be positive");
  GaussRule r{Vec(n), Vec(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

namespace {

// Kronrod 15 abscissae/weights with embedded Gauss 7.
constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Segment {
  double a, b;
  T value;
  double err;
  bool operator<(const Segment& o) const { return err < o.err; }
};

template <class T, class F>
Segment<T> gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const T fc = f(c);
  T k = wgk[7] * fc;
  T g = wg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const T f1 = f(c - h * xgk[j]);
    const T f2 = f(c + h * xgk[j]);
    k += wgk[j] * (f1 + f2);
    if (j % 2 == 1) g += wg[j / 2] * (f1 + f2);
  }
  return {a, b, k * h, std::abs(k * h - g * h)};
}

template <class T, class F>
T adaptive(const F& f, double a, double b, const AdaptiveOptions& opt) {
  if (a == b) return T{};
  std::priority_queue<Segment<T>> heap;
  auto first = gk15<T>(f, a, b);
  T total = first.value;
  double err = first.err;
  heap.push(first);
  int count = 1;
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) && count < opt.max_intervals) {
    auto s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    auto l = gk15<T>(f, s.a, m);
    auto r = gk15<T>(f, m, s.b);
    total += l.value + r.value - s.value;
    err += l.err + r.err - s.err;
    heap.push(l);
    heap.push(r);
    ++count;
  }
  // re-sum to shed accumulated cancellation from the running updates
  T sum{};
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opt) {
  return adaptive<double>(f, a, b, opt);
}

cplx integrate_adaptive_c(const std::function<cplx(double)>& f, double a, double b,
                          const AdaptiveOptions& opt) {
  return adaptive<cplx>(f, a, b, opt);
}

} // namespace qns
