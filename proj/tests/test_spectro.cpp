#include <doctest.h>

#include "qns/filterfn.hpp"
#include "qns/quadrature.hpp"
#include "qns/spectro.hpp"
#include "qns/waveform.hpp"

#include <algorithm>
#include <numeric>
#include <random>

using namespace qns;

namespace {

// Exhaustive NNLS for small n: least squares on every support set, keep the best feasible one.
Vec nnls_enumerate(const Eigen::MatrixXd& A, const Vec& y) {
  const Index n = A.cols();
  Vec best = Vec::Zero(n);
  double best_r = y.norm();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    Eigen::MatrixXd S(A.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) S.col(static_cast<Index>(k)) = A.col(idx[k]);
    const Vec z = S.colPivHouseholderQr().solve(y);
    if ((z.array() < 0.0).any()) continue;
    Vec x = Vec::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[static_cast<Index>(k)];
    const double r = (A * x - y).norm();
    if (r < best_r) best_r = r, best = x;
  }
  return best;
}

Eigen::MatrixXd random_matrix(Index m, Index n, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = nd(g);
  return A;
}

} // namespace

TEST_CASE("nnls clips against the identity") {
  const Vec x = nnls(Eigen::MatrixXd::Identity(3, 3), Vec((Vec(3) << 1, -1, 2).finished()));
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == 0.0);
  CHECK(x[2] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("nnls recovers a nonnegative solution of a consistent system") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd A = random_matrix(30, 12, g);
    Vec s(12);
    for (Index i = 0; i < 12; ++i) s[i] = i % 4 == 0 ? 0.0 : u(g);
    const Vec x = nnls(A, A * s);
    CHECK((x - s).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("nnls returns zero when A'y <= 0") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::MatrixXd A(8, 4);
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 4; ++j) A(i, j) = u(g);
  const Vec y = -Vec::Ones(8);
  REQUIRE(((A.transpose() * y).array() <= 0.0).all());
  CHECK(nnls(A, y).isZero(0.0));
}

TEST_CASE("nnls matches exhaustive support enumeration and meets KKT") {
  std::mt19937_64 g(23);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::MatrixXd A = random_matrix(10, 6, g);
    Vec y(10);
    for (auto& v : y) v = nd(g);
    const Vec x = nnls(A, y);
    const Vec ref = nnls_enumerate(A, y);
    CHECK((x.array() >= 0.0).all());
    CHECK((x - ref).lpNorm<Eigen::Infinity>() < 1e-9 * std::max(1.0, ref.lpNorm<Eigen::Infinity>()));
    CHECK(nnls_kkt_residual(A, y, x) <= 1e-10);
  }
}

TEST_CASE("nnls iteration cap raises with the best iterate") {
  std::mt19937_64 g(3);
  const Eigen::MatrixXd A = random_matrix(20, 10, g);
  const Vec y = A * Vec::Ones(10);
  NnlsOptions opt;
  opt.max_iterations = 2;
  try {
    (void)nnls(A, y, opt);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.best_iterate().size() == 10);
    CHECK((e.best_iterate().array() >= 0.0).all());
  }
  CHECK_THROWS_AS(nnls(A, Vec::Ones(3)), ParameterError);
}

TEST_CASE("minimum residual never decreases as rows are added") {
  std::mt19937_64 g(8);
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd A = random_matrix(25, 6, g);
  Vec y(25);
  for (auto& v : y) v = nd(g);
  double prev = 0.0;
  for (Index m = 1; m <= 25; ++m) {
    const Eigen::MatrixXd Am = A.topRows(m);
    const Vec ym = y.head(m);
    const double r = (Am * nnls(Am, ym) - ym).norm();
    CHECK(r >= prev - 1e-12);
    prev = r;
  }
}

TEST_CASE("overlap bands agree with adaptive quadrature of the exact filter") {
  const double T = 20e-6;
  const auto w = dephasing_robust(T, 7, 2, 2000);
  const double dw = two_pi / T;
  const Index L = 12;
  const Vec row = overlap_row(w, L, dw);
  for (Index l = 1; l <= L; ++l) {
    const double lo = l == 1 ? 0.0 : (l - 0.5) * dw, hi = (l + 0.5) * dw;
    const double ref = integrate_adaptive(
                           [&](double om) { return amplitude_ff(w, Vec::Constant(1, om)).values[0]; }, lo, hi,
                           {1e-30, 1e-10, 20000}) /
                       pi;
    // 8 trapezoid nodes per linewidth: second-order error on a lobe of width 2 pi / T
    CHECK(std::abs(row[l - 1] - ref) <= 1e-2 * row.maxCoeff());
  }
}

TEST_CASE("dephasing-robust rows peak on the diagonal") {
  QnsDesign d;
  const auto waves = qns_waveforms(d);
  const OverlapMatrix A = overlap_matrix(waves, d.L, d.dw(), {}, Vec::LinSpaced(d.L, 1, d.L) * d.dw());
  CHECK((A.values.array() >= 0.0).all());
  for (Index r = 0; r + 1 < A.rows(); ++r) {
    Index at;
    A.values.row(r).maxCoeff(&at);
    CHECK(at == r);
    // the passband [lambda - 2 pi / T, lambda + 2 pi / T] lies inside bands r-1 .. r+1
    double near = A.values(r, r);
    if (r > 0) near += A.values(r, r - 1);
    near += A.values(r, r + 1);
    CHECK(near >= 0.9 * A.values.row(r).sum());
  }
}

TEST_CASE("zero waveform gives a zero row") {
  const PiecewiseConstantWaveform w(Vec::Zero(500), 4e-8);
  CHECK(overlap_row(w, 10, two_pi / w.total_time()).isZero(0.0));
}

TEST_CASE("row sums obey Parseval for concentrated filters") {
  QnsDesign d;
  d.family = WaveformFamily::dpss;
  const auto waves = qns_waveforms(d);
  const OverlapMatrix A = overlap_matrix(waves, d.L, d.dw());
  for (Index r : {0, 4, 14, 29}) {
    const auto& w = waves[static_cast<std::size_t>(r)];
    const double parseval = w.dt / 4.0 * w.samples.squaredNorm();
    CHECK(A.values.row(r).sum() == doctest::Approx(parseval).epsilon(0.02));
  }
}

TEST_CASE("resolution and range are validated") {
  const auto w = dephasing_robust(20e-6, 3, 1, 2000);
  OverlapOptions coarse;
  coarse.points_per_linewidth = 4;
  CHECK_THROWS_AS(overlap_row(w, 10, two_pi / 20e-6, coarse), GridError);
  // Nyquist is pi / dt = 1000 * 2 pi / T here
  CHECK_THROWS_AS(overlap_row(w, 1000, two_pi / 20e-6), GridError);
  CHECK_THROWS_AS(overlap_matrix({w, PiecewiseConstantWaveform(Vec::Zero(10), 1e-8)}, 5, 1e5), ParameterError);
  QnsDesign bad;
  bad.delta_omega = 1.5 * two_pi / bad.T;
  CHECK_THROWS_AS(qns_waveforms(bad), ParameterError);
}

TEST_CASE("noiseless flat spectrum is recovered") {
  for (auto fam : {WaveformFamily::dephasing_robust, WaveformFamily::dpss}) {
    QnsDesign d;
    d.family = fam;
    const OverlapMatrix A = overlap_matrix(qns_waveforms(d), d.L, d.dw());
    const Vec truth = Vec::Constant(d.L, 1.04e-11);
    const ReconstructionResult r = reconstruct(A.values * truth, A, truth);
    CHECK(r.relative_error.lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK((r.estimate.array() >= 0.0).all());
    CHECK(r.condition >= 1.0);
    CHECK(r.condition < 100.0);
    CHECK(r.min_diagonal_fraction > 0.5);
  }
}

TEST_CASE("row order does not change the reconstruction") {
  QnsDesign d;
  d.family = WaveformFamily::dpss;
  d.L = 20;
  const OverlapMatrix A = overlap_matrix(qns_waveforms(d), d.L, d.dw());
  std::mt19937_64 g(4);
  std::normal_distribution<double> nd;
  Vec y = A.values * Vec::LinSpaced(d.L, 2.0, 0.1);
  for (auto& v : y) v *= 1.0 + 0.2 * nd(g); // noisy, so some bands hit zero

  std::vector<Index> perm(static_cast<std::size_t>(d.L));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), g);
  OverlapMatrix B = A;
  Vec yb(d.L);
  for (Index r = 0; r < d.L; ++r) {
    B.values.row(r) = A.values.row(perm[static_cast<std::size_t>(r)]);
    yb[r] = y[perm[static_cast<std::size_t>(r)]];
  }
  const Vec a = reconstruct(y, A).estimate, b = reconstruct(yb, B).estimate;
  CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-12 * a.lpNorm<Eigen::Infinity>());
}

TEST_CASE("weights rescale rows") {
  QnsDesign d;
  d.L = 10;
  const OverlapMatrix A = overlap_matrix(qns_waveforms(d), d.L, d.dw());
  const Vec truth = Vec::LinSpaced(d.L, 1.0, 2.0);
  const Vec y = A.values * truth;
  const ReconstructionResult r = reconstruct(y, A, truth, Vec(Vec::LinSpaced(d.L, 1.0, 5.0)));
  CHECK(r.relative_error.lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK_THROWS_AS(reconstruct(y, A, truth, Vec(Vec::Constant(d.L, -1.0))), ParameterError);
  CHECK_THROWS_AS(reconstruct(y.head(3), A), ParameterError);
}

TEST_CASE("silent noise gives zero estimates end to end") {
  QnsDesign d;
  d.L = 4;
  const QnsRunRecord rec = run_qns(d, SpectrumModel::none(), SpectrumModel::none(), 3, 1);
  for (const auto& t : rec.survival) {
    CHECK(t.p[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.p[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.p[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(rec.reconstruction.estimate.lpNorm<Eigen::Infinity>() < 1e-20);
}
