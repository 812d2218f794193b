#include <doctest.h>

#include "oracles.hpp"
#include "qns/filterfn.hpp"
#include "qns/waveform.hpp"

#include <cmath>

using namespace qns;

TEST_CASE("J0 evaluator") {
  for (double x = 0.0; x < 80.0; x += 0.173) CHECK(std::abs(bessel_j0(x) - std::cyl_bessel_j(0.0, x)) < 1e-12);
  CHECK(bessel_j0(-3.0) == doctest::Approx(bessel_j0(3.0)));
}

TEST_CASE("J0 zeros") {
  const Vec r = bessel_j0_roots(60);
  CHECK(r[0] == doctest::Approx(2.40).epsilon(0.003));
  CHECK(r[1] == doctest::Approx(5.52).epsilon(0.002));
  CHECK(r[2] == doctest::Approx(8.65).epsilon(0.001));
  CHECK(std::abs(r[0] - 2.404825557695773) < 1e-12);
  for (int s = 0; s < 12; ++s) {
    const double ref = oracle::j0_root_bisect(r[s] - 0.5, r[s] + 0.5);
    CHECK(std::abs(r[s] - ref) < 1e-10);
  }
  for (int s = 1; s < 60; ++s) CHECK(r[s] > r[s - 1]);
  CHECK(std::abs((r[49] - r[48]) - pi) < 1e-3);
  CHECK_THROWS_AS(bessel_j0_roots(0), ParameterError);
}

TEST_CASE("root nearest a target amplitude") {
  CHECK(root_index_near(mhz(0.01), mhz(5.0)) == 159);
  CHECK(root_index_near(mhz(1.0), mhz(5.0)) == 2);
  CHECK(root_index_near(mhz(0.1), mhz(0.24)) == 1);
}

TEST_CASE("dephasing-robust waveform") {
  const double T = 100e-6;
  const Index N = 10000;
  const auto w = dephasing_robust(T, 10, 1, N);
  const double lambda = two_pi * 10 / T;
  const double om0 = dephasing_robust_amplitude(T, 10, 1, N);
  CHECK(w.samples[0] == 0.0);
  CHECK(w.size() == N);
  CHECK(w.dt == doctest::Approx(T / N));
  CHECK(std::abs(w.net_rotation()) < 1e-12);
  CHECK(w.identity_gate());
  CHECK(om0 / lambda == doctest::Approx(2.404825557695773).epsilon(1e-5));
  CHECK(dephasing_robust_amplitude(T, 10, 1, N, false) / lambda == doctest::Approx(2.404825557695773).epsilon(1e-14));
  const double peak = w.samples.cwiseAbs().maxCoeff();
  CHECK(peak <= om0);
  CHECK(peak >= om0 * std::cos(lambda * w.dt));
  // the polished amplitude closes the sampled DC dephasing filter
  const double fz0 = dephasing_ff(w, Vec::Zero(1)).values[0];
  CHECK(fz0 < 1e-20 * T * T);

  for (int M : {1, 3, 7})
    for (int root : {1, 2, 5})
      CHECK(std::abs(dephasing_robust(20e-6, M, root, 2000).net_rotation()) < 1e-11);
  CHECK_THROWS_AS(dephasing_robust(T, 0, 1, N), ParameterError);
  CHECK_THROWS_AS(dephasing_robust(T, 3, 0, N), ParameterError);
  CHECK_THROWS_AS(dephasing_robust(T, 6000, 1, N), ParameterError);
}

TEST_CASE("modulated Slepian waveform") {
  const Index N = 2000;
  const double dt = 1e-8;
  const double amp = mhz(5.0);
  for (int M : {1, 4, 20}) {
    const auto w = modulated_dpss_waveform(N, 1.0 / N, amp, two_pi * M / (N * dt), dt);
    CHECK(w.samples[0] == 0.0);
    CHECK(std::abs(w.net_rotation()) < 1e-9 * amp * N * dt);
    CHECK(w.samples.cwiseAbs().maxCoeff() <= amp * (1 + 1e-12));
    CHECK(w.identity_gate());
  }
  CHECK_THROWS_AS(modulated_dpss_waveform(N, 1.0 / N, amp, 1.234e5, dt), ParameterError);
  CHECK_THROWS_AS(modulated_dpss_waveform(N, 0.5 / N, amp, two_pi / (N * dt), dt), ParameterError);
}

TEST_CASE("synthesis from coefficients") {
  const Index N = 400;
  const double dt = 5e-8;
  const double w0 = two_pi * 3 / (N * dt);
  const DpssSet d = dpss(N, 2.0 / N, 3);

  WaveformCoefficients zero{w0, Vec::Zero(3), Vec::Zero(3)};
  CHECK(synthesize(zero, d, dt).samples.cwiseAbs().maxCoeff() == 0.0);

  WaveformCoefficients one{w0, Vec::Zero(1), Vec::Constant(1, 2.5)};
  const auto w = synthesize(one, d, dt);
  for (Index m = 0; m < N; ++m) CHECK(w.samples[m] == doctest::Approx(2.5 * d.sequences(0, m) * std::sin(w0 * m * dt)));

  WaveformCoefficients x{w0, Vec::Random(3), Vec::Random(3)}, y{w0, Vec::Random(3), Vec::Random(3)};
  WaveformCoefficients z{w0, 2.0 * x.cos_coeffs - 0.5 * y.cos_coeffs, 2.0 * x.sin_coeffs - 0.5 * y.sin_coeffs};
  const Vec lhs = synthesize(z, d, dt).samples;
  const Vec rhs = 2.0 * synthesize(x, d, dt).samples - 0.5 * synthesize(y, d, dt).samples;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  const Vec p = x.packed();
  const auto back = WaveformCoefficients::from_packed(w0, p);
  CHECK((back.cos_coeffs - x.cos_coeffs).norm() == 0.0);
  CHECK((back.sin_coeffs - x.sin_coeffs).norm() == 0.0);

  WaveformCoefficients big{w0, Vec::Zero(4), Vec::Zero(4)};
  CHECK_THROWS_AS(synthesize(big, d, dt), ParameterError);
}

TEST_CASE("rotation angle") {
  const Vec z = rotation_angle(PiecewiseConstantWaveform(Vec::Zero(5), 1.0));
  CHECK(z.size() == 6);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);

  const Vec r = rotation_angle(PiecewiseConstantWaveform(Vec::Constant(100, 3.0), 0.1));
  for (Index i = 0; i <= 100; ++i) CHECK(r[i] == doctest::Approx(0.3 * i).epsilon(1e-14));

  const double T = 20e-6;
  const auto w = dephasing_robust(T, 2, 1, 4000);
  const double lambda = two_pi * 2 / T;
  const double om0 = dephasing_robust_amplitude(T, 2, 1, 4000);
  const Vec th = rotation_angle(w);
  for (Index i = 0; i <= 4000; i += 37) {
    const double t = i * w.dt;
    CHECK(std::abs(th[i] - om0 / lambda * (1 - std::cos(lambda * t))) < 2.0 * om0 * w.dt);
  }
}
