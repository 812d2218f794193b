#include "qns/spectro.hpp"

#include "qns/bessel.hpp"
#include "qns/fft.hpp"
#include "qns/filterfn.hpp"
#include "qns/parallel.hpp"
#include "qns/rng.hpp"
#include "qns/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qns {

namespace {

// int_0^x of the piecewise-linear interpolant of f on the grid j h (prefix = cumulative trapezoid)
double running_integral(const Vec& f, const Vec& prefix, double h, double x) {
  const Index n = f.size();
  const double s = x / h;
  const auto j = std::min<Index>(static_cast<Index>(std::floor(s)), n - 2);
  const double frac = s - static_cast<double>(j);
  const double fx = f[j] + frac * (f[j + 1] - f[j]);
  return prefix[j] + 0.5 * frac * h * (f[j] + fx);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

} // namespace

Vec OverlapMatrix::frequencies() const {
  return Vec::LinSpaced(bands(), 1.0, static_cast<double>(bands())) * delta_omega;
}

Vec overlap_row(const PiecewiseConstantWaveform& w, Index L, double delta_omega, const OverlapOptions& opt) {
  if (L < 1 || !(delta_omega > 0.0)) throw ParameterError("overlap_row: need L >= 1 and delta_omega > 0");
  if (w.size() < 1 || !(w.dt > 0.0)) throw ParameterError("overlap_row: empty waveform");
  if (opt.points_per_linewidth < 8) throw GridError("overlap_row: need at least 8 points per 2 pi / T");
  const double top = (static_cast<double>(L) + 0.5) * delta_omega;
  if (top > pi / w.dt) throw GridError("overlap_row: L dw exceeds the Nyquist frequency");

  const Index P = fast_fft_size(static_cast<Index>(opt.points_per_linewidth) * w.size());
  const double h = two_pi / (static_cast<double>(P) * w.dt);
  const Index count = std::min<Index>(P / 2 + 1, static_cast<Index>(std::ceil(top / h)) + 2);
  const FilterFunctionGrid g = amplitude_ff_dft(w, P, count);

  Vec prefix(count);
  prefix[0] = 0.0;
  for (Index j = 1; j < count; ++j) prefix[j] = prefix[j - 1] + 0.5 * h * (g.values[j - 1] + g.values[j]);

  Vec row(L);
  double lo = 0.0;
  for (Index l = 1; l <= L; ++l) {
    const double hi = (static_cast<double>(l) + 0.5) * delta_omega;
    row[l - 1] = (running_integral(g.values, prefix, h, hi) - running_integral(g.values, prefix, h, lo)) / pi;
    lo = hi;
  }
  return row;
}

OverlapMatrix overlap_matrix(const std::vector<PiecewiseConstantWaveform>& waveforms, Index L, double delta_omega,
                             const OverlapOptions& opt, Vec modulation) {
  if (waveforms.empty()) throw ParameterError("overlap_matrix: no waveforms");
  for (const auto& w : waveforms)
    if (w.size() != waveforms.front().size() || std::abs(w.dt - waveforms.front().dt) > 1e-12 * w.dt)
      throw ParameterError("overlap_matrix: waveforms must share N and dt");
  if (modulation.size() && modulation.size() != static_cast<Index>(waveforms.size()))
    throw ParameterError("overlap_matrix: one modulation frequency per waveform");
  OverlapMatrix A;
  A.delta_omega = delta_omega;
  A.modulation = std::move(modulation);
  A.values.resize(static_cast<Index>(waveforms.size()), L);
  // validate once so the workers cannot all throw the same error
  if (opt.points_per_linewidth < 8) throw GridError("overlap_matrix: need at least 8 points per 2 pi / T");
  parallel_for(A.rows(), [&](Index r) {
    A.values.row(r) = overlap_row(waveforms[static_cast<std::size_t>(r)], L, delta_omega, opt).transpose();
  });
  return A;
}

double nnls_kkt_residual(const Eigen::MatrixXd& A, const Vec& y, const Vec& x) {
  const Vec g = A.transpose() * (y - A * x);
  const double scale = std::max((A.transpose() * y).lpNorm<Eigen::Infinity>(), std::numeric_limits<double>::min());
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) worst = std::max(worst, -x[i] * scale); // infeasible counts as a violation
    worst = std::max(worst, x[i] > 0.0 ? std::abs(g[i]) : std::max(0.0, g[i]));
  }
  return worst / scale;
}

Vec nnls(const Eigen::MatrixXd& A, const Vec& y, const NnlsOptions& opt) {
  if (A.rows() != y.size()) throw ParameterError("nnls: dimensions do not agree");
  const Index n = A.cols();
  Vec x = Vec::Zero(n);
  if (n == 0) return x;
  const double scale = (A.transpose() * y).lpNorm<Eigen::Infinity>();
  if (!(scale > 0.0)) return x;
  const double tol = opt.kkt_tol * scale;
  const int cap = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(3 * n) + 10;

  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  std::vector<bool> blocked(static_cast<std::size_t>(n), false); // just failed to enter; cleared when x moves

  auto solve_passive = [&](std::vector<Index>& idx) {
    idx.clear();
    for (Index i = 0; i < n; ++i)
      if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
    Eigen::MatrixXd Ap(A.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Index>(k)) = A.col(idx[k]);
    const Vec zp = Ap.colPivHouseholderQr().solve(y);
    Vec z = Vec::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[static_cast<Index>(k)];
    return z;
  };

  std::vector<Index> idx;
  for (int it = 0; it < cap; ++it) {
    const Vec g = A.transpose() * (y - A * x);
    Index enter = -1;
    double best = tol;
    for (Index i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (!passive[u] && !blocked[u] && g[i] > best) {
        best = g[i];
        enter = i;
      }
    }
    if (enter < 0) {
      if (nnls_kkt_residual(A, y, x) <= opt.kkt_tol) return x;
      // blocked columns still violate; allow them back once
      if (std::none_of(blocked.begin(), blocked.end(), [](bool b) { return b; })) return x;
      std::fill(blocked.begin(), blocked.end(), false);
      continue;
    }
    passive[static_cast<std::size_t>(enter)] = true;

    Vec z = solve_passive(idx);
    if (z[enter] <= 0.0) {
      // rounding made the new column useless; keep it out this round
      passive[static_cast<std::size_t>(enter)] = false;
      blocked[static_cast<std::size_t>(enter)] = true;
      continue;
    }
    // inner loop: step back to the feasible boundary until the passive solve is positive
    for (int inner = 0; inner <= n; ++inner) {
      double alpha = 1.0;
      Index hit = -1;
      for (Index i : idx)
        if (z[i] <= 0.0) {
          const double a = x[i] / (x[i] - z[i]);
          if (a < alpha) {
            alpha = a;
            hit = i;
          }
        }
      if (hit < 0) break;
      x += alpha * (z - x);
      passive[static_cast<std::size_t>(hit)] = false;
      for (Index i : idx)
        if (x[i] <= 0.0) {
          x[i] = 0.0;
          passive[static_cast<std::size_t>(i)] = false;
        }
      z = solve_passive(idx);
    }
    x = z;
    std::fill(blocked.begin(), blocked.end(), false);
  }
  if (nnls_kkt_residual(A, y, x) <= opt.kkt_tol) return x;
  throw NonConvergenceError("nnls: iteration cap reached", x);
}

double ReconstructionResult::median_abs_relative_error(double limit) const {
  std::vector<double> v;
  for (Index i = 0; i < relative_error.size(); ++i)
    if (frequencies[i] < limit && std::isfinite(relative_error[i])) v.push_back(std::abs(relative_error[i]));
  return median(std::move(v));
}

double ReconstructionResult::median_relative_error(double limit) const {
  std::vector<double> v;
  for (Index i = 0; i < relative_error.size(); ++i)
    if (frequencies[i] < limit && std::isfinite(relative_error[i])) v.push_back(relative_error[i]);
  return median(std::move(v));
}

ReconstructionResult reconstruct(const Vec& measurements, const OverlapMatrix& A, const std::optional<Vec>& truth,
                                 const std::optional<Vec>& weights) {
  if (measurements.size() != A.rows()) throw ParameterError("reconstruct: one measurement per matrix row");
  if (truth && truth->size() != A.bands()) throw ParameterError("reconstruct: truth must have one value per band");
  if (weights && weights->size() != A.rows()) throw ParameterError("reconstruct: one weight per row");

  Eigen::MatrixXd M = A.values;
  Vec y = measurements;
  if (weights) {
    if ((weights->array() < 0.0).any()) throw ParameterError("reconstruct: weights must be nonnegative");
    M = weights->asDiagonal() * M;
    y = weights->asDiagonal() * y;
  }

  ReconstructionResult r;
  r.frequencies = A.frequencies();
  r.estimate = nnls(M, y);
  r.residual_norm = (M * r.estimate - y).norm();
  const Vec sv = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
  r.condition = sv.size() && sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  r.min_diagonal_fraction = 1.0;
  for (Index i = 0; i < std::min(A.rows(), A.bands()); ++i) {
    const double s = A.values.row(i).sum();
    if (s > 0.0) r.min_diagonal_fraction = std::min(r.min_diagonal_fraction, A.values(i, i) / s);
  }
  if (truth) {
    r.truth = *truth;
    r.relative_error = (r.estimate - r.truth).cwiseQuotient(r.truth);
  }
  return r;
}

std::vector<PiecewiseConstantWaveform> qns_waveforms(const QnsDesign& d) {
  if (d.N < 2 || !(d.T > 0.0) || d.L < 1) throw ParameterError("qns_waveforms: need N >= 2, T > 0, L >= 1");
  if (!(d.omega_max > 0.0)) throw ParameterError("qns_waveforms: omega_max must be positive");
  const double dt = d.T / static_cast<double>(d.N);
  const double cycles = d.dw() * d.T / two_pi;
  const auto per_band = static_cast<int>(std::lround(cycles));
  if (per_band < 1 || std::abs(cycles - per_band) > 1e-9 * cycles)
    throw ParameterError("qns_waveforms: delta_omega must be a positive multiple of 2 pi / T");
  if ((static_cast<double>(d.L) + 0.5) * d.dw() > pi / dt) throw GridError("qns_waveforms: L dw exceeds Nyquist");

  std::vector<PiecewiseConstantWaveform> out(static_cast<std::size_t>(d.L));
  parallel_for(d.L, [&](Index r) {
    const double lambda = d.dw() * static_cast<double>(r + 1);
    auto& w = out[static_cast<std::size_t>(r)];
    if (d.family == WaveformFamily::dephasing_robust)
      w = dephasing_robust(d.T, per_band * static_cast<int>(r + 1), root_index_near(lambda, d.omega_max), d.N);
    else
      w = modulated_dpss_waveform(d.N, d.NW / static_cast<double>(d.N), d.omega_max, lambda, dt);
  });
  return out;
}

Vec true_spectrum(const SpectrumModel& amp, const OverlapMatrix& A) {
  const Vec f = A.frequencies();
  Vec s(f.size());
  for (Index i = 0; i < f.size(); ++i) s[i] = psd_eval(amp, f[i]);
  return s;
}

QnsRunRecord run_qns(const QnsDesign& d, const SpectrumModel& amp, const SpectrumModel& deph, Index realizations,
                     std::uint64_t seed, const SimulationOptions& sim, const OverlapOptions& ov) {
  amp.validate();
  deph.validate();
  const auto waves = qns_waveforms(d);
  QnsRunRecord rec;
  rec.lambdas = Vec::LinSpaced(d.L, 1.0, static_cast<double>(d.L)) * d.dw();
  const OverlapMatrix A = overlap_matrix(waves, d.L, d.dw(), ov, rec.lambdas);
  rec.survival.resize(static_cast<std::size_t>(d.L));
  rec.estimator.resize(d.L);
  rec.estimator_err.resize(d.L);
  // rows run one after another; each simulation is already parallel over realizations
  for (Index r = 0; r < d.L; ++r) {
    const SurvivalTriple t = survival_probabilities(waves[static_cast<std::size_t>(r)], amp, deph, realizations,
                                                    derive_seed(seed, static_cast<std::uint64_t>(r), 0), sim);
    rec.survival[static_cast<std::size_t>(r)] = t;
    rec.estimator[r] = t.estimator;
    rec.estimator_err[r] = t.estimator_err;
  }
  rec.reconstruction = reconstruct(rec.estimator, A, true_spectrum(amp, A));
  return rec;
}

} // namespace qns
