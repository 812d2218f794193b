#include "qns/qsim.hpp"

#include "qns/filterfn.hpp"
#include "qns/parallel.hpp"
#include "qns/quadrature.hpp"
#include "qns/rng.hpp"
#include "qns/waveform.hpp"

#include <cmath>

namespace qns {

namespace {

constexpr std::uint64_t amp_stream = 0;
constexpr std::uint64_t deph_stream = 1;
constexpr std::uint64_t shot_stream = 2;

void check_lengths(const PiecewiseConstantWaveform& w, const Vec& a, const Vec& b) {
  if (a.size() != w.size() || b.size() != w.size()) throw ParameterError("noise and waveform lengths differ");
}

// int_0^dt e^{i a s / dt} ds / dt
cplx segment_phasor(double a) {
  if (std::abs(a) < 1e-4) return {1.0 - a * a / 6.0, 0.5 * a - a * a * a / 24.0};
  return (std::polar(1.0, a) - 1.0) / cplx(0.0, a);
}

double mean_of(const Vec& v) { return v.size() ? v.mean() : 0.0; }

double std_error(const Vec& v) {
  const Index n = v.size();
  if (n < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(n - 1) / static_cast<double>(n));
}

// Gauss-Legendre panels over [0, cutoff], breaking at the spectrum's kinks.
template <class F>
double half_line_overlap(const SpectrumModel& s, double T, int ppl, F&& ff) {
  const GaussRule g = gauss_legendre(8);
  const double panel = two_pi / T / std::max(1.0, ppl / 8.0);
  std::vector<double> nodes, weights;
  double lo = 0.0;
  for (double hi : s.breakpoints()) {
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel)));
    const double h = (hi - lo) / n;
    for (int p = 0; p < n; ++p)
      for (Index i = 0; i < g.nodes.size(); ++i) {
        nodes.push_back(lo + (p + 0.5) * h + 0.5 * h * g.nodes[i]);
        weights.push_back(0.5 * h * g.weights[i]);
      }
    lo = hi;
  }
  if (nodes.empty()) return 0.0;
  const Vec om = Eigen::Map<const Vec>(nodes.data(), static_cast<Index>(nodes.size()));
  const Vec f = ff(om);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * psd_eval(s, nodes[i]) * f[static_cast<Index>(i)];
  return acc / pi;
}

} // namespace

Eigen::Matrix2cd QubitPropagator::matrix() const {
  const cplx I(0.0, 1.0);
  Eigen::Matrix2cd U;
  U << c[0] - I * c[3], -I * c[1] - c[2], -I * c[1] + c[2], c[0] + I * c[3];
  return U;
}

std::array<double, 3> QubitPropagator::survival() const {
  const double c0 = c[0] * c[0];
  return {c0 + c[1] * c[1], c0 + c[2] * c[2], c0 + c[3] * c[3]};
}

QubitPropagator propagate(const PiecewiseConstantWaveform& w, const Vec& beta_omega, const Vec& beta_z) {
  check_lengths(w, beta_omega, beta_z);
  Eigen::Vector4d c(1, 0, 0, 0);
  for (Index m = 0; m < w.size(); ++m) {
    const double hx = 0.5 * w.samples[m] * (1.0 + beta_omega[m]);
    const double hz = beta_z[m];
    const double norm = std::hypot(hx, hz);
    const double th = w.dt * norm;
    const double s = norm > 0.0 ? std::sin(th) / norm : 0.0;
    const double a0 = std::cos(th), ax = s * hx, az = s * hz;
    // (a0, ax, 0, az) times c, later factor on the left
    const Eigen::Vector4d n(a0 * c[0] - ax * c[1] - az * c[3],
                            a0 * c[1] + c[0] * ax + (-az * c[2]),
                            a0 * c[2] + (az * c[1] - ax * c[3]),
                            a0 * c[3] + c[0] * az + (ax * c[2]));
    c = n;
  }
  return QubitPropagator{c};
}

QubitPropagator propagate(const PiecewiseConstantWaveform& w, const NoiseRealization& amp,
                          const NoiseRealization& deph) {
  return propagate(w, amp.samples, deph.samples);
}

Eigen::Vector3d error_vector_first_order(const PiecewiseConstantWaveform& w, const Vec& beta_omega,
                                         const Vec& beta_z) {
  check_lengths(w, beta_omega, beta_z);
  double a1 = 0.0, theta = 0.0;
  cplx z = 0.0;
  for (Index m = 0; m < w.size(); ++m) {
    const double a = w.samples[m] * w.dt;
    a1 += 0.5 * a * beta_omega[m];
    z += beta_z[m] * std::polar(1.0, theta) * segment_phasor(a);
    theta += a;
  }
  return {a1, w.dt * z.imag(), w.dt * z.real()};
}

double magnus_second_order_a1(const PiecewiseConstantWaveform& w, const Vec& beta_z) {
  if (beta_z.size() != w.size()) throw ParameterError("noise and waveform lengths differ");
  // earlier segments: Im(E_j conj(sum_{k<j} E_k)) with E_j = b_j int_seg e^{i Theta}
  double acc = 0.0, theta = 0.0;
  cplx before = 0.0;
  for (Index m = 0; m < w.size(); ++m) {
    const double om = w.samples[m];
    const double a = om * w.dt;
    const cplx E = beta_z[m] * w.dt * std::polar(1.0, theta) * segment_phasor(a);
    acc += (E * std::conj(before)).imag();
    // within one segment: int_0^dt ds1 int_0^s1 ds2 sin(om (s1 - s2))
    double self;
    if (std::abs(a) < 1e-3) self = om * w.dt * w.dt * w.dt / 6.0 * (1.0 - a * a / 20.0);
    else self = (w.dt - std::sin(a) / om) / om;
    acc += beta_z[m] * beta_z[m] * self;
    before += E;
    theta += a;
  }
  return acc;
}

SurvivalTriple survival_probabilities(const PiecewiseConstantWaveform& w, const SpectrumModel& amp,
                                      const SpectrumModel& deph, Index n_realizations, std::uint64_t seed,
                                      const SimulationOptions& opt, RealizationRecord* record) {
  if (n_realizations < 1) throw ParameterError("survival_probabilities: need at least one realization");
  if (opt.shots < 0) throw ParameterError("survival_probabilities: shots must be >= 0");
  amp.validate();
  deph.validate();
  const Index R = n_realizations;
  RealizationRecord rec;
  rec.survival.resize(R, 3);
  rec.estimator.resize(R);
  if (opt.diagnostics) {
    rec.a_first.resize(R, 3);
    rec.a1_second.resize(R);
  }
  SamplingOptions sa{opt.oversample, amp_stream}, sd{opt.oversample, deph_stream};

  parallel_for(R, [&](Index r) {
    const auto u = static_cast<std::uint64_t>(r);
    const NoiseRealization na = sample_process(amp, w.size(), w.dt, seed, u, sa);
    const NoiseRealization nd = sample_process(deph, w.size(), w.dt, seed, u, sd);
    std::array<double, 3> p = propagate(w, na, nd).survival();
    if (opt.shots > 0) {
      Rng rng(derive_seed(seed, u, shot_stream));
      for (double& pi_ : p) {
        int up = 0;
        for (int s = 0; s < opt.shots; ++s) up += rng.uniform() < pi_;
        pi_ = static_cast<double>(up) / opt.shots;
      }
    }
    rec.survival.row(r) << p[0], p[1], p[2];
    rec.estimator[r] = 0.5 * (1.0 + p[0] - p[1] - p[2]);
    if (opt.diagnostics) {
      rec.a_first.row(r) = error_vector_first_order(w, na.samples, nd.samples).transpose();
      rec.a1_second[r] = magnus_second_order_a1(w, nd.samples);
    }
  });

  SurvivalTriple t;
  t.n_realizations = R;
  for (int i = 0; i < 3; ++i) {
    t.p[i] = mean_of(rec.survival.col(i));
    t.p_err[i] = std_error(rec.survival.col(i));
  }
  t.estimator = mean_of(rec.estimator);
  t.estimator_err = std_error(rec.estimator);
  if (record) *record = std::move(rec);
  return t;
}

std::pair<double, double> tomographic_estimator(const SurvivalTriple& t) {
  const double v = 0.5 * (1.0 + t.p[0] - t.p[1] - t.p[2]);
  const double e = 0.5 * (t.p_err[0] + t.p_err[1] + t.p_err[2]);
  return {v, e};
}

double overlap_amplitude(const PiecewiseConstantWaveform& w, const SpectrumModel& s, int ppl) {
  if (s.kind != SpectrumKind::flat_cutoff && s.kind != SpectrumKind::one_over_f)
    throw ModelTypeError("overlap_amplitude: needs a continuous spectrum");
  if (s.silent()) return 0.0;
  return half_line_overlap(s, w.total_time(), ppl, [&](const Vec& om) { return amplitude_ff(w, om).values; });
}

double overlap_dephasing(const PiecewiseConstantWaveform& w, const SpectrumModel& s, int ppl) {
  if (s.kind == SpectrumKind::dc_delta) {
    const Vec zero = Vec::Zero(1);
    return s.mu * s.mu * dephasing_ff(w, zero).values[0];
  }
  if (s.silent()) return 0.0;
  return half_line_overlap(s, w.total_time(), ppl, [&](const Vec& om) { return dephasing_ff(w, om).values; });
}

BiasBreakdown bias_breakdown(const PiecewiseConstantWaveform& w, const SpectrumModel& amp, const SpectrumModel& deph,
                             const BiasOptions& opt) {
  amp.validate();
  deph.validate();
  if (amp.dephasing_kind()) throw ModelTypeError("bias_breakdown: amplitude spectrum must be flat_cutoff");
  if (!deph.dephasing_kind() && !deph.silent())
    throw ModelTypeError("bias_breakdown: dephasing spectrum must be one_over_f or dc_delta");
  const double T = w.total_time();
  for (const SpectrumModel* s : {&amp, &deph})
    if (!s->silent() && s->cutoff() > 0.0 && s->cutoff() < two_pi / T / 4.0)
      throw GridError("bias_breakdown: spectrum cutoff below the filter resolution");

  BiasBreakdown b;
  b.I_Omega = overlap_amplitude(w, amp, opt.points_per_linewidth);
  b.I_Z = deph.dephasing_kind() ? overlap_dephasing(w, deph, opt.points_per_linewidth) : 0.0;

  if (deph.kind == SpectrumKind::dc_delta) {
    const double d0 = magnus_second_order_a1(w, Vec::Ones(w.size()));
    b.detuning_term = std::pow(deph.mu, 4) * d0 * d0;
    b.a12_sq = b.detuning_term;
  } else if (deph.kind == SpectrumKind::one_over_f && !deph.silent()) {
    Vec sq(opt.realizations);
    const SamplingOptions sd{opt.oversample, deph_stream};
    parallel_for(opt.realizations, [&](Index r) {
      const auto nd = sample_process(deph, w.size(), w.dt, opt.seed, static_cast<std::uint64_t>(r), sd);
      sq[r] = std::pow(magnus_second_order_a1(w, nd.samples), 2);
    });
    b.a12_sq = mean_of(sq);
    b.a12_sq_err = std_error(sq);
  }
  b.predicted = b.I_Omega - b.I_Omega * b.I_Omega - b.product_term() + b.a12_sq;
  return b;
}

double gz_overlap_riemann(const PiecewiseConstantWaveform& w, const SpectrumModel& deph, Index L) {
  if (deph.kind != SpectrumKind::one_over_f) throw ModelTypeError("gz_overlap_riemann: needs a 1/f spectrum");
  const double dw = two_pi / w.total_time();
  Vec om(2 * L + 1), s(2 * L + 1);
  for (Index l = -L; l <= L; ++l) {
    om[l + L] = dw * static_cast<double>(l);
    s[l + L] = psd_eval(deph, std::abs(om[l + L]));
  }
  const auto g = higher_order_ff(w, om, om);
  double acc = 0.0;
  for (Index i = 0; i < om.size(); ++i)
    for (Index j = 0; j < om.size(); ++j) acc += g.values(i, j).real() * s[i] * s[j];
  return acc * dw * dw / (4.0 * pi * pi);
}

} // namespace qns
