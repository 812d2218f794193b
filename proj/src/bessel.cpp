#include "qns/bessel.hpp"

#include <cmath>

namespace qns {

namespace {

double j0_series(double x) {
  // sum (-1)^k (x/2)^{2k} / (k!)^2 ; terms grow to ~e^x/x before decaying,
  // so the cutoff at 12 keeps cancellation below ~1e-11 absolute.
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum) && k > 2 * q) break;
  }
  return sum;
}

double j0_asymptotic(double x) {
  // Hankel: J0 = sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - pi/4, y = 1/(8x)
  const double y = 1.0 / (8.0 * x);
  double tp = 1.0, tq = -y;
  double p = tp, q = tq;
  for (int k = 1; k < 40; ++k) {
    const double a = 4.0 * k - 3.0, b = 4.0 * k - 1.0, c = 4.0 * k + 1.0;
    const double np = -tp * (a * a) * (b * b) / ((2.0 * k - 1.0) * (2.0 * k)) * y * y;
    const double nq = -tq * (b * b) * (c * c) / ((2.0 * k) * (2.0 * k + 1.0)) * y * y;
    if (std::abs(np) > std::abs(tp) || std::abs(nq) > std::abs(tq)) break; // series turned
    tp = np;
    tq = nq;
    p += tp;
    q += tq;
    if (std::abs(tp) < 1e-17 && std::abs(tq) < 1e-17) break;
  }
  const double chi = x - 0.25 * pi;
  return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace

double bessel_j0(double x) {
  x = std::abs(x);
  return x <= 12.0 ? j0_series(x) : j0_asymptotic(x);
}

Vec bessel_j0_roots(int n) {
  if (n < 1) throw ParameterError("bessel_j0_roots: count must be >= 1");
  Vec roots(n);
  for (int s = 1; s <= n; ++s) {
    // McMahon's estimate is within ~1e-3 of the zero even at s = 1
    const double beta = (s - 0.25) * pi;
    const double guess = beta + 1.0 / (8.0 * beta) - 124.0 / (3.0 * std::pow(8.0 * beta, 3));
    double lo = guess - 0.3, hi = guess + 0.3;
    double flo = bessel_j0(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = bessel_j0(mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots[s - 1] = 0.5 * (lo + hi);
  }
  return roots;
}

int root_index_near(double lambda, double target_omega0) {
  if (!(lambda > 0) || !(target_omega0 > 0)) throw ParameterError("root_index_near: arguments must be positive");
  const double ratio = target_omega0 / lambda;
  const int guess = std::max(1, static_cast<int>(std::lround(ratio / pi + 0.25)));
  const Vec r = bessel_j0_roots(guess + 2);
  int best = 1;
  for (int s = 1; s <= r.size(); ++s)
    if (std::abs(r[s - 1] - ratio) < std::abs(r[best - 1] - ratio)) best = s;
  return best;
}

} // namespace qns
