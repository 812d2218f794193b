#include "qns/fft.hpp"
#include "qns/filterfn.hpp"
#include "qns/parallel.hpp"
#include "qns/waveform.hpp"

#include <cmath>
#include <map>
#include <set>

namespace qns {

namespace {

// D(a, b) = dt^2 sum_{j1} sum_{j2 <= j1} sin(Theta_j1 - Theta_j2) e^{i a t1} e^{i b t2}
// = dt sum_{j1} e^{i a t1} [sin Theta_j1 hc(j1, b) - cos Theta_j1 hs(j1, b)]
// with prefix sums hc(k, b) = dt sum_{j <= k} cos Theta_j e^{i b t_j}.
struct NestedSine {
  Index N;
  double dt;
  Vec s, c;

  explicit NestedSine(const PiecewiseConstantWaveform& w) : N(w.size()), dt(w.dt), s(w.size()), c(w.size()) {
    const Vec th = rotation_angle(w);
    for (Index j = 0; j < N; ++j) {
      s[j] = std::sin(th[j]);
      c[j] = std::cos(th[j]);
    }
  }

  // integrand over j1 for second-argument frequency b
  CVec inner(double b) const {
    CVec y(N);
    cplx hc = 0.0, hs = 0.0;
    for (Index j = 0; j < N; ++j) {
      const cplx ph = std::polar(dt, b * dt * static_cast<double>(j));
      hc += c[j] * ph;
      hs += s[j] * ph;
      y[j] = s[j] * hc - c[j] * hs;
    }
    return y;
  }

  // D(2 pi la / T, 2 pi lb / T) for all la (index la mod N).
  CVec column(Index lb) const {
    const double b = two_pi * static_cast<double>(lb) / (static_cast<double>(N) * dt);
    return dt * dft_backward(inner(b));
  }

  cplx at(double a, double b) const {
    const CVec y = inner(b);
    cplx acc = 0.0;
    for (Index j = 0; j < N; ++j) acc += y[j] * std::polar(1.0, a * dt * static_cast<double>(j));
    return dt * acc;
  }
};

Index grid_index(double omega, double T) {
  const double l = omega * T / two_pi;
  const double r = std::round(l);
  if (std::abs(l - r) > 1e-9 * std::max(1.0, std::abs(r)))
    throw GridError("higher_order_ff: frequency is not a multiple of 2 pi / T");
  return static_cast<Index>(r);
}

} // namespace

cplx nested_sine_transform(const PiecewiseConstantWaveform& w, double a, double b) {
  return NestedSine(w).at(a, b);
}

HigherOrderFFGrid higher_order_ff(const PiecewiseConstantWaveform& w, const Vec& omegas,
                                  const Vec& omegas_prime) {
  const double T = w.total_time();
  const Index N = w.size();
  std::vector<Index> l(omegas.size()), lp(omegas_prime.size());
  for (Index i = 0; i < omegas.size(); ++i) l[i] = grid_index(omegas[i], T);
  for (Index i = 0; i < omegas_prime.size(); ++i) lp[i] = grid_index(omegas_prime[i], T);

  auto wrap = [N](Index k) { return ((k % N) + N) % N; };
  // G = D(w,-w) D(w',-w') + D(w,w') [D(-w,-w') + D(-w',-w)]
  std::set<Index> cols;
  for (Index v : lp) {
    cols.insert(wrap(v));
    cols.insert(wrap(-v));
  }
  for (Index v : l) cols.insert(wrap(-v));

  const std::vector<Index> order(cols.begin(), cols.end());
  std::vector<CVec> data(order.size());
  const NestedSine ns(w);
  parallel_for(static_cast<Index>(order.size()), [&](Index i) { data[static_cast<std::size_t>(i)] = ns.column(order[static_cast<std::size_t>(i)]); });
  std::map<Index, const CVec*> col;
  for (std::size_t i = 0; i < order.size(); ++i) col[order[i]] = &data[i];

  auto D = [&](Index a, Index b) { return (*col.at(wrap(b)))[wrap(a)]; };

  HigherOrderFFGrid g{omegas, omegas_prime, Eigen::MatrixXcd(omegas.size(), omegas_prime.size()), T};
  for (Index i = 0; i < omegas.size(); ++i)
    for (Index j = 0; j < omegas_prime.size(); ++j) {
      const Index a = l[i], b = lp[j];
      g.values(i, j) = D(a, -a) * D(b, -b) + D(a, b) * (D(-a, -b) + D(-b, -a));
    }
  return g;
}

} // namespace qns
