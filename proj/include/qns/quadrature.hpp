#pragma once

#include "qns/core.hpp"

#include <functional>

namespace qns {

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  Vec nodes;
  Vec weights;
};
GaussRule gauss_legendre(int n);

/// Composite Gauss-Legendre over equal panels of [a, b].
template <class F>
auto integrate_panels(F&& f, double a, double b, int panels, const GaussRule& rule) {
  using R = decltype(f(a));
  R acc{};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double c = lo + 0.5 * h;
    R part{};
    for (Index i = 0; i < rule.nodes.size(); ++i)
      part += rule.weights[i] * f(c + 0.5 * h * rule.nodes[i]);
    acc += 0.5 * h * part;
  }
  return acc;
}

struct AdaptiveOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  int max_intervals = 20000;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opt = {});
cplx integrate_adaptive_c(const std::function<cplx(double)>& f, double a, double b,
                          const AdaptiveOptions& opt = {});

} // namespace qns
