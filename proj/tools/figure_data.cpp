// figure-data: tidy CSV tables behind each figure. Every table is named by content.

#include "cli_common.hpp"

#include "qns/bessel.hpp"
#include "qns/fft.hpp"
#include "qns/filterfn.hpp"
#include "qns/lp_reduce.hpp"
#include "qns/optimize.hpp"
#include "qns/parallel.hpp"
#include "qns/qsim.hpp"
#include "qns/slepian.hpp"
#include "qns/spectro.hpp"
#include "qns/waveform.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <map>

using namespace qns;
using nlohmann::json;

namespace cli {

namespace {

struct Scale {
  Index N_wave;      // waveform/filter figures at T = 100 us
  Index N_region;    // K = 1 feasible-region toy
  Index N_optimize;  // optimized waveform for the comparison figure
  Index N_qns;       // spectroscopy runs
  double T_qns;
  Index L;
  Index realizations;
  Index bias_realizations;
  std::vector<double> detunings_mhz;
  std::vector<double> c_values;
};

Scale scale_for(const FigureOptions& o) {
  Scale s;
  if (o.scale == "full") {
    s = {20000, 40000, 20000, 10000, 100e-6, 200, 500, 2000, {0.01, 0.05, 0.10, 0.15, 0.19}, {299.1, 100.0, 30.0, 10.0, 3.18}};
  } else {
    s = {2000, 4000, 2000, 2000, 20e-6, 40, 500, 2000, {0.01, 0.05, 0.10, 0.19}, {299.1, 30.0, 3.18}};
  }
  if (o.N > 0) s.N_wave = s.N_region = s.N_qns = o.N;
  if (o.optimize_N > 0) s.N_optimize = o.optimize_N;
  if (o.L > 0) s.L = o.L;
  if (o.realizations > 0) s.realizations = s.bias_realizations = o.realizations;
  return s;
}

constexpr double T_wave = 100e-6;
const double lambda_wave = mhz(0.1);

Vec mhz_of(const Vec& omegas) { return omegas / mhz(1.0); }

// F_Omega and F_Z on a shared DFT grid up to max_mhz, 16 points per 2 pi / T.
std::pair<FilterFunctionGrid, FilterFunctionGrid> filters(const PiecewiseConstantWaveform& w, double max_mhz) {
  const Index P = fast_fft_size(16 * w.size());
  const double dw = two_pi / (static_cast<double>(P) * w.dt);
  const Index count = std::min<Index>(P / 2 + 1, static_cast<Index>(std::ceil(mhz(max_mhz) / dw)) + 1);
  return {amplitude_ff_dft(w, P, count), dephasing_ff_dft(w, P, count)};
}

CsvTable waveform_columns(const std::vector<std::string>& names, const std::vector<const PiecewiseConstantWaveform*>& ws) {
  CsvTable t;
  t.comments = {"omega/2pi in MHz per segment start"};
  t.columns = {"t_us"};
  for (const auto& n : names) t.columns.push_back(n + "_mhz");
  const Index N = ws.front()->size();
  t.data.resize(N, 1 + static_cast<Index>(ws.size()));
  t.data.col(0) = Vec::LinSpaced(N, 0, static_cast<double>(N - 1)) * ws.front()->dt * 1e6;
  for (std::size_t i = 0; i < ws.size(); ++i) t.data.col(1 + static_cast<Index>(i)) = mhz_of(ws[i]->samples);
  return t;
}

CsvTable filter_columns(const std::vector<std::string>& names, const std::vector<const PiecewiseConstantWaveform*>& ws,
                        double max_mhz) {
  std::vector<std::pair<FilterFunctionGrid, FilterFunctionGrid>> g;
  for (auto* w : ws) g.push_back(filters(*w, max_mhz));
  CsvTable t;
  t.comments = {"F_Omega and F_Z in s^2"};
  t.columns = {"omega_over_2pi_mhz"};
  for (const auto& n : names) t.columns.push_back("f_omega_" + n);
  for (const auto& n : names) t.columns.push_back("f_z_" + n);
  const Index n = g.front().first.omegas.size();
  const auto k = static_cast<Index>(ws.size());
  t.data.resize(n, 1 + 2 * k);
  t.data.col(0) = mhz_of(g.front().first.omegas);
  for (Index i = 0; i < k; ++i) {
    t.data.col(1 + i) = g[static_cast<std::size_t>(i)].first.values;
    t.data.col(1 + k + i) = g[static_cast<std::size_t>(i)].second.values;
  }
  return t;
}

void feasible_region(const Scale& s, std::uint64_t seed, ArtifactWriter& aw, json& summary) {
  const Index N = s.N_region;
  const double dt = T_wave / static_cast<double>(N);
  const DpssSet d = dpss(N, 1.0 / static_cast<double>(N), 1);
  const Eigen::MatrixXd B = modulated_basis(d, lambda_wave, dt, 1);
  const auto reduced = prune_constraints(amplitude_constraints(d, lambda_wave, dt, 1), 0.1, seed);
  const double box = 1.0 / (2.0 * d.sequences.row(0).cwiseAbs().maxCoeff());

  const Index n = 720;
  CsvTable t;
  t.comments = {"K=1 coefficients u = (cos, sin) / omega_max", "series: 0 true region, 1 box bounds, 2 reduced region",
                "retained_rows=" + std::to_string(reduced.size())};
  t.columns = {"series", "theta", "u_cos", "u_sin"};
  t.data.resize(3 * n, 4);
  for (Index i = 0; i < n; ++i) {
    const double th = two_pi * static_cast<double>(i) / static_cast<double>(n);
    const Eigen::Vector2d dir(std::cos(th), std::sin(th));
    const double r_true = 1.0 / (B * dir).cwiseAbs().maxCoeff();
    double r_box = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2; ++k)
      if (std::abs(dir[k]) > 0) r_box = std::min(r_box, box / std::abs(dir[k]));
    const double r_red = 1.0 / std::max(1e-300, (reduced.rows * dir).maxCoeff());
    const double r[3] = {r_true, r_box, r_red};
    for (int k = 0; k < 3; ++k) t.data.row(k * n + i) << k, th, r[k] * dir[0], r[k] * dir[1];
  }
  aw.csv("feasible_region.csv", t);
  summary["feasible_region"] = {{"N", N}, {"retained_rows", reduced.size()}};
}

void ff_comparison(const Scale& s, std::uint64_t seed, ArtifactWriter& aw, json& summary) {
  DesignSettings ds;
  ds.N = s.N_optimize;
  const DesignProblem p = make_design_problem(ds);
  const auto dr = dephasing_robust(ds.T, 10, 1, ds.N);
  bool ok = true;
  WaveformCoefficients c;
  try {
    c = solve_design(p, project_onto_family(dr, p), seed);
  } catch (const NonConvergenceError& e) {
    ok = false;
    c = WaveformCoefficients::from_packed(p.omega0, e.best_iterate());
  }
  const PiecewiseConstantWaveform opt(p.basis * c.packed(), p.dt);
  const double peak = dr.samples.cwiseAbs().maxCoeff();
  const auto sl = modulated_dpss_waveform(ds.N, 1.0 / static_cast<double>(ds.N), peak, lambda_wave, p.dt);
  const std::vector<std::string> names = {"optimized", "dr", "dpss"};
  const std::vector<const PiecewiseConstantWaveform*> ws = {&opt, &dr, &sl};
  aw.csv("ff_comparison_waveforms.csv", waveform_columns(names, ws));
  aw.csv("ff_comparison.csv", filter_columns(names, ws, 0.5));
  const double dist = std::min((opt.samples - dr.samples).norm(), (opt.samples + dr.samples).norm()) / dr.samples.norm();
  summary["ff_comparison"] = {{"N", ds.N}, {"converged", ok}, {"distance_optimized_to_dr", dist}};
}

void bessel_roots(const Scale& s, ArtifactWriter& aw, json& summary) {
  std::vector<PiecewiseConstantWaveform> w;
  for (int r = 1; r <= 3; ++r) w.push_back(dephasing_robust(T_wave, 10, r, s.N_wave));
  const std::vector<std::string> names = {"root1", "root2", "root3"};
  const std::vector<const PiecewiseConstantWaveform*> ws = {&w[0], &w[1], &w[2]};
  aw.csv("bessel_roots_waveforms.csv", waveform_columns(names, ws));
  aw.csv("bessel_roots.csv", filter_columns(names, ws, 0.5));
  summary["bessel_roots"] = {{"N", s.N_wave}};
}

void gz(const Scale& s, ArtifactWriter& aw, json& summary) {
  const auto dr = dephasing_robust(T_wave, 10, 1, s.N_wave);
  const auto sl = modulated_dpss_waveform(s.N_wave, 1.0 / static_cast<double>(s.N_wave), dr.samples.cwiseAbs().maxCoeff(),
                                          lambda_wave, dr.dt);
  const Index span = 30;
  const Vec grid = Vec::LinSpaced(2 * span + 1, -static_cast<double>(span), static_cast<double>(span)) * (two_pi / T_wave);
  const HigherOrderFFGrid a = higher_order_ff(dr, grid, grid), b = higher_order_ff(sl, grid, grid);
  CsvTable t;
  t.comments = {"G_Z in s^4 on the 2 pi l / T grid, lambda/2pi = 0.1 MHz"};
  t.columns = {"omega_mhz", "omega_prime_mhz", "abs_dr", "abs_dpss", "re_dr", "im_dr", "re_dpss", "im_dpss"};
  const Index n = grid.size();
  t.data.resize(n * n, 8);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      t.data.row(i * n + j) << to_mhz(grid[i]), to_mhz(grid[j]), std::abs(a.values(i, j)), std::abs(b.values(i, j)),
          a.values(i, j).real(), a.values(i, j).imag(), b.values(i, j).real(), b.values(i, j).imag();
  aw.csv("gz.csv", t);
  summary["gz"] = {{"N", s.N_wave}, {"span", span}};
}

QnsDesign qns_design(const Scale& s, WaveformFamily f) {
  QnsDesign d;
  d.family = f;
  d.N = s.N_qns;
  d.T = s.T_qns;
  d.L = s.L;
  return d;
}

const SpectrumModel amplitude_model = SpectrumModel::flat(1.04e-11, mhz(2.0));

void bias_vs_detuning(const Scale& s, std::uint64_t seed, ArtifactWriter& aw, json& summary) {
  const double lambda = mhz(1.0);
  const double dt = s.T_qns / static_cast<double>(s.N_qns);
  const int M = static_cast<int>(std::lround(lambda * s.T_qns / two_pi));
  const PiecewiseConstantWaveform w[2] = {
      dephasing_robust(s.T_qns, M, root_index_near(lambda, mhz(5.0)), s.N_qns),
      modulated_dpss_waveform(s.N_qns, 1.0 / static_cast<double>(s.N_qns), mhz(5.0), lambda, dt)};
  std::vector<double> deltas = {0.0};
  deltas.insert(deltas.end(), s.detunings_mhz.begin(), s.detunings_mhz.end());

  CsvTable t;
  t.comments = {"family: 0 dephasing-robust, 1 dpss; lambda/2pi = 1 MHz", "discrepancy = P - I_Omega"};
  t.columns = {"family", "delta_mhz", "p_estimator", "p_err", "i_omega", "discrepancy", "i_omega_sq", "product_term",
               "a12_sq", "predicted"};
  t.data.resize(2 * static_cast<Index>(deltas.size()), 10);
  BiasOptions bo;
  bo.realizations = s.bias_realizations;
  bo.seed = seed;
  for (int f = 0; f < 2; ++f)
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const SpectrumModel deph = SpectrumModel::detuning(mhz(deltas[i]));
      const SurvivalTriple st = survival_probabilities(w[f], amplitude_model, deph, s.bias_realizations, seed);
      const BiasBreakdown b = bias_breakdown(w[f], amplitude_model, deph, bo);
      t.data.row(f * static_cast<Index>(deltas.size()) + static_cast<Index>(i))
          << f, deltas[i], st.estimator, st.estimator_err, b.I_Omega, st.estimator - b.I_Omega, b.I_Omega * b.I_Omega,
          b.product_term(), b.a12_sq, b.predicted;
    }
  aw.csv("bias_vs_detuning.csv", t);
  summary["bias_vs_detuning"] = {{"N", s.N_qns}, {"realizations", s.bias_realizations}};
}

using ModelFor = std::function<SpectrumModel(double)>;

void reconstruction(const Scale& s, std::uint64_t seed, const std::string& name, const std::string& parameter,
                    const std::vector<double>& values, const ModelFor& model, ArtifactWriter& aw, json& summary) {
  CsvTable t;
  t.comments = {"family: 0 dephasing-robust, 1 dpss"};
  t.columns = {"family", parameter, "omega_over_2pi_mhz", "s_omega_est", "s_omega_true"};
  if (parameter == "C") t.columns.insert(t.columns.begin() + 2, "t2_us");
  const Index L = s.L;
  const auto k = static_cast<Index>(values.size());
  t.data.resize(2 * k * L, static_cast<Index>(t.columns.size()));
  json errs = json::array();
  for (int f = 0; f < 2; ++f)
    for (Index i = 0; i < k; ++i) {
      const SpectrumModel deph = model(values[static_cast<std::size_t>(i)]);
      const QnsRunRecord rec = run_qns(qns_design(s, f == 0 ? WaveformFamily::dephasing_robust : WaveformFamily::dpss),
                                       amplitude_model, deph, s.realizations, seed);
      const auto& r = rec.reconstruction;
      const double t2 = parameter == "C" ? t2_estimate(deph, 1.0) * 1e6 : 0.0;
      for (Index l = 0; l < L; ++l) {
        auto row = t.data.row((f * k + i) * L + l);
        if (parameter == "C")
          row << f, values[static_cast<std::size_t>(i)], t2, to_mhz(r.frequencies[l]), r.estimate[l], r.truth[l];
        else
          row << f, values[static_cast<std::size_t>(i)], to_mhz(r.frequencies[l]), r.estimate[l], r.truth[l];
      }
      errs.push_back({{"family", f == 0 ? "dr" : "dpss"},
                      {parameter, values[static_cast<std::size_t>(i)]},
                      {"median_abs_rel_error_in_band", r.median_abs_relative_error(amplitude_model.cutoff())},
                      {"median_rel_error_in_band", r.median_relative_error(amplitude_model.cutoff())}});
    }
  aw.csv(name + ".csv", t);
  summary[name] = {{"N", s.N_qns}, {"L", L}, {"realizations", s.realizations}, {"errors", errs}};
}

} // namespace

int figure_data(const FigureOptions& o, const std::filesystem::path& out) {
  const std::vector<std::string> all = {"feasible_region", "ff_comparison",          "bessel_roots",
                                        "gz",              "bias_vs_detuning",       "reconstruction_detuning",
                                        "reconstruction_dephasing"};
  for (const auto& name : o.only)
    if (std::find(all.begin(), all.end(), name) == all.end())
      throw ConfigError("--only: unknown table '" + name + "'");
  const Scale s = scale_for(o);
  const json cfg = {{"scale", o.scale},           {"only", o.only},         {"realizations", s.realizations},
                    {"N_wave", s.N_wave},         {"N_region", s.N_region}, {"N_optimize", s.N_optimize},
                    {"N_qns", s.N_qns},           {"T_qns_us", s.T_qns * 1e6}, {"L", s.L},
                    {"detunings_mhz", s.detunings_mhz}, {"C", s.c_values}};
  ArtifactWriter aw(out, "figure-data", cfg, o.seed);
  auto wanted = [&](const std::string& n) {
    return o.only.empty() || std::find(o.only.begin(), o.only.end(), n) != o.only.end();
  };
  json summary = json::object();
  if (wanted("feasible_region")) feasible_region(s, o.seed, aw, summary);
  if (wanted("ff_comparison")) ff_comparison(s, o.seed, aw, summary);
  if (wanted("bessel_roots")) bessel_roots(s, aw, summary);
  if (wanted("gz")) gz(s, aw, summary);
  if (wanted("bias_vs_detuning")) bias_vs_detuning(s, o.seed, aw, summary);
  if (wanted("reconstruction_detuning"))
    reconstruction(s, o.seed, "reconstruction_detuning", "delta_mhz", s.detunings_mhz,
                   [](double d) { return SpectrumModel::detuning(mhz(d)); }, aw, summary);
  if (wanted("reconstruction_dephasing"))
    reconstruction(s, o.seed, "reconstruction_dephasing", "C", s.c_values,
                   [](double c) { return SpectrumModel::one_over_f(c, 1e8, mhz(0.01), mhz(2.0)); }, aw, summary);
  aw.json("figure_summary.json", summary);
  aw.finish();
  return 0;
}

} // namespace cli
