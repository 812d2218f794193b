#pragma once

#include "qns/core.hpp"

namespace qns {

/// J0(x): ascending series for |x| <= 12, Hankel asymptotics beyond.
double bessel_j0(double x);

/// First n positive zeros of J0, ascending.
Vec bessel_j0_roots(int n);

/// Index (1-based) of the J0 zero whose product with lambda is closest to target.
int root_index_near(double lambda, double target_omega0);

} // namespace qns
