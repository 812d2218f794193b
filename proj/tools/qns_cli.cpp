// qns: command-line driver. Every subcommand writes CSV/JSON artifacts plus a
// manifest.json into its output directory.

#include "cli_common.hpp"

#include "qns/bessel.hpp"
#include "qns/fft.hpp"
#include "qns/filterfn.hpp"
#include "qns/io.hpp"
#include "qns/lp_reduce.hpp"
#include "qns/optimize.hpp"
#include "qns/parallel.hpp"
#include "qns/qsim.hpp"
#include "qns/slepian.hpp"
#include "qns/spectro.hpp"
#include "qns/waveform.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace qns;
using cli::ConfigError;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct WaveformArgs {
  std::string family = "dr";
  double lambda_mhz = 0.1;
  double T_us = 100.0;
  long N = 10000;
  int root = 1; // 0: the root whose amplitude is nearest omega_max
  double omega_max_mhz = 5.0;
  double NW = 1.0;
  bool no_polish = false;

  void add_to(CLI::App* app) {
    app->add_option("--waveform,--family", family, "dr or dpss")->check(CLI::IsMember({"dr", "dpss"}));
    app->add_option("--lambda-mhz", lambda_mhz, "modulation frequency lambda/2pi")->check(CLI::PositiveNumber);
    app->add_option("--T-us", T_us, "total duration")->check(CLI::PositiveNumber);
    app->add_option("--N", N, "number of segments")->check(CLI::Range(2L, 100000000L));
    app->add_option("--root", root, "J0 root index for dr (0 = nearest omega_max)")->check(CLI::NonNegativeNumber);
    app->add_option("--omega-max-mhz", omega_max_mhz, "maximum Rabi rate / 2pi")->check(CLI::PositiveNumber);
    app->add_option("--NW", NW, "Slepian time-bandwidth product")->check(CLI::PositiveNumber);
    app->add_flag("--no-polish", no_polish, "use Omega0 = lambda j0 exactly");
  }

  json to_json() const {
    return {{"family", family}, {"lambda_mhz", lambda_mhz}, {"T_us", T_us},     {"N", N},
            {"root", root},     {"omega_max_mhz", omega_max_mhz}, {"NW", NW}, {"polish", !no_polish}};
  }

  PiecewiseConstantWaveform build() const {
    const double T = T_us * 1e-6;
    const double lambda = mhz(lambda_mhz);
    const double cycles = lambda * T / two_pi;
    if (std::abs(cycles - std::round(cycles)) > 1e-9 * cycles || cycles < 0.5)
      throw ConfigError("--lambda-mhz times --T-us must be a whole number of periods");
    if (family == "dr") {
      const int r = root > 0 ? root : root_index_near(lambda, mhz(omega_max_mhz));
      return dephasing_robust(T, static_cast<int>(std::lround(cycles)), r, N, !no_polish);
    }
    return modulated_dpss_waveform(N, NW / static_cast<double>(N), mhz(omega_max_mhz), lambda, T / static_cast<double>(N));
  }

  std::vector<std::string> describe() const {
    std::vector<std::string> d;
    const json j = to_json();
    for (const auto& [k, v] : j.items()) d.push_back(k + "=" + v.dump());
    return d;
  }
};

json waveform_summary(const PiecewiseConstantWaveform& w, double lambda) {
  const double T = w.total_time();
  const double fz0 = dephasing_ff(w, Vec::Zero(1)).values[0];
  return {{"N", w.size()},
          {"dt_s", w.dt},
          {"T_s", T},
          {"net_rotation_rad", w.net_rotation()},
          {"peak_omega_over_2pi_mhz", to_mhz(w.samples.cwiseAbs().maxCoeff())},
          {"fz0_over_T2", fz0 / (T * T)},
          {"concentration_lambda_pm_2pi_over_T", spectral_concentration(w, lambda, two_pi / T)}};
}

int cmd_dpss(long N, double NW, long K, const fs::path& out) {
  if (K > N) throw ConfigError("--K must not exceed --N");
  ArtifactWriter aw(out, "dpss", {{"N", N}, {"NW", NW}, {"K", K}}, 0);
  const DpssSet d = dpss(N, NW / static_cast<double>(N), K);
  CsvTable t;
  t.comments = {"N=" + std::to_string(N), "NW=" + json(NW).dump()};
  t.columns.push_back("n");
  for (long k = 0; k < K; ++k) t.columns.push_back("v" + std::to_string(k));
  t.data.resize(N, K + 1);
  t.data.col(0) = Vec::LinSpaced(N, 0, static_cast<double>(N - 1));
  t.data.rightCols(K) = d.sequences.transpose();
  aw.csv("dpss.csv", t);
  aw.json("eigenvalues.json", {{"eigenvalues", std::vector<double>(d.eigenvalues.begin(), d.eigenvalues.end())}});
  aw.finish();
  return 0;
}

int cmd_waveform(const WaveformArgs& a, const fs::path& out) {
  ArtifactWriter aw(out, "waveform", a.to_json(), 0);
  const auto w = a.build();
  aw.csv("waveform.csv", waveform_table(w, a.describe()));
  aw.json("summary.json", waveform_summary(w, mhz(a.lambda_mhz)));
  aw.finish();
  return 0;
}

int cmd_ff(const WaveformArgs& a, double max_mhz, int ppl, const fs::path& out) {
  json cfg = a.to_json();
  cfg["max_mhz"] = max_mhz;
  cfg["points_per_linewidth"] = ppl;
  ArtifactWriter aw(out, "ff", cfg, 0);
  const auto w = a.build();
  const Index P = fast_fft_size(static_cast<Index>(ppl) * w.size());
  const double dw = two_pi / (static_cast<double>(P) * w.dt);
  const Index count = std::min<Index>(P / 2 + 1, static_cast<Index>(std::ceil(mhz(max_mhz) / dw)) + 1);
  aw.csv("waveform.csv", waveform_table(w, a.describe()));
  aw.csv("ff_amplitude.csv", ff_table(amplitude_ff_dft(w, P, count)));
  aw.csv("ff_dephasing.csv", ff_table(dephasing_ff_dft(w, P, count)));
  aw.json("summary.json", waveform_summary(w, mhz(a.lambda_mhz)));
  aw.finish();
  return 0;
}

int cmd_gz(const WaveformArgs& a, long span, const fs::path& out) {
  json cfg = a.to_json();
  cfg["span"] = span;
  ArtifactWriter aw(out, "gz", cfg, 0);
  const auto w = a.build();
  const double step = two_pi / w.total_time();
  const Vec grid = Vec::LinSpaced(2 * span + 1, -static_cast<double>(span), static_cast<double>(span)) * step;
  aw.csv("gz.csv", gz_table(higher_order_ff(w, grid, grid)));
  aw.finish();
  return 0;
}

int cmd_prune(long N, long K, double NW, double omega0_mhz, double T_us, double eps, std::uint64_t seed,
              const fs::path& out) {
  const json cfg = {{"N", N}, {"K", K}, {"NW", NW}, {"omega0_mhz", omega0_mhz}, {"T_us", T_us}, {"eps", eps}};
  ArtifactWriter aw(out, "prune", cfg, seed);
  const double dt = T_us * 1e-6 / static_cast<double>(N);
  const DpssSet d = dpss(N, NW / static_cast<double>(N), K);
  const auto full = amplitude_constraints(d, mhz(omega0_mhz), dt, K);
  const auto reduced = prune_constraints(full, eps, seed);
  aw.csv("constraints.csv", constraints_table(reduced));
  aw.json("summary.json", {{"original_rows", full.size()}, {"retained_rows", reduced.size()}, {"labels", reduced.labels}});
  aw.finish();
  return 0;
}

struct OptimizeArgs {
  double omega0_mhz = 0.1;
  long K = 3;
  double NW = 1.0;
  double omega_max_mhz = 5.0;
  double eps = 0.10;
  std::uint64_t seed = 1;
  long N = 20000;
  double T_us = 100.0;
  double delta_omega_khz = 1.0;
  std::string start = "dr";
  long sweep = 0;
  std::vector<long> sweep_list;

  json to_json() const {
    return {{"omega0_mhz", omega0_mhz}, {"K", K}, {"NW", NW}, {"omega_max_mhz", omega_max_mhz}, {"eps", eps},
            {"N", N}, {"T_us", T_us}, {"delta_omega_khz", delta_omega_khz}, {"start", start}, {"sweep", sweep},
            {"sweep_list", sweep_list}};
  }
};

WaveformCoefficients start_point(const OptimizeArgs& a, const DesignProblem& p) {
  const double T = p.total_time();
  const int M = static_cast<int>(std::lround(p.omega0 * T / two_pi));
  if (a.start == "dr") {
    if (M < 1 || std::abs(p.omega0 * T / two_pi - M) > 1e-9 * M)
      throw ConfigError("--start dr needs omega0 to be a multiple of 1 / T");
    return project_onto_family(dephasing_robust(T, M, 1, p.N), p);
  }
  if (a.start == "dpss")
    return project_onto_family(modulated_dpss_waveform(p.N, a.NW / static_cast<double>(p.N), mhz(0.3), p.omega0, p.dt), p);
  return {};
}

json coefficients_json(const WaveformCoefficients& c, const DesignReport& r, bool converged) {
  return {{"omega0_mhz", to_mhz(c.omega0)},
          {"cos_rad_per_s", std::vector<double>(c.cos_coeffs.begin(), c.cos_coeffs.end())},
          {"sin_rad_per_s", std::vector<double>(c.sin_coeffs.begin(), c.sin_coeffs.end())},
          {"converged", converged},
          {"objective_over_T2", r.objective},
          {"fz0_over_T2", r.fz0_over_T2},
          {"identity_residual", r.identity_residual},
          {"peak_over_max", r.peak_over_max},
          {"outer_iterations", r.outer_iterations}};
}

int cmd_optimize(const OptimizeArgs& a, const fs::path& out) {
  DesignSettings s;
  s.N = a.N;
  s.T = a.T_us * 1e-6;
  s.NW = a.NW;
  s.K = a.K;
  s.omega0 = mhz(a.omega0_mhz);
  s.omega_max = mhz(a.omega_max_mhz);
  s.eps = a.eps;
  s.seed = a.seed;
  s.delta_omega = two_pi * 1e3 * a.delta_omega_khz;
  ArtifactWriter aw(out, "optimize", a.to_json(), a.seed);

  std::vector<long> ms = a.sweep_list;
  for (long m = 1; m <= a.sweep; ++m) ms.push_back(m);
  const DesignProblem base = make_design_problem(s);
  const double T2 = s.T * s.T;

  if (ms.empty()) {
    DesignReport rep;
    bool ok = true;
    WaveformCoefficients c;
    try {
      c = solve_design(base, start_point(a, base), a.seed, {}, &rep);
    } catch (const NonConvergenceError& e) {
      ok = false;
      c = WaveformCoefficients::from_packed(base.omega0, e.best_iterate());
      rep = design_report(c, base);
    }
    rep.objective /= T2;
    aw.json("coefficients.json", coefficients_json(c, rep, ok));
    aw.csv("waveform.csv", waveform_table(synthesize(c, base.dpss, base.dt), {"optimized=true"}));
    aw.set("outcome", ok ? "converged" : "nonconverged");
    aw.finish();
    if (!ok) std::cerr << "optimize: F_Z(0) constraint not met; best iterate written\n";
    return ok ? 0 : 3;
  }

  // sweep: points run in parallel, results are collected in sweep order
  struct Point {
    WaveformCoefficients c;
    DesignReport r;
    bool ok = false;
    double dist = 0.0;
    Index rows = 0;
  };
  std::vector<Point> pts(ms.size());
  parallel_for(static_cast<Index>(ms.size()), [&](Index i) {
    Point& pt = pts[static_cast<std::size_t>(i)];
    const double omega0 = two_pi * static_cast<double>(ms[static_cast<std::size_t>(i)]) / s.T;
    const DesignProblem p = with_modulation(base, omega0, s.eps, s.seed);
    pt.rows = p.reduced_constraints.size();
    OptimizeArgs ai = a;
    ai.omega0_mhz = to_mhz(omega0);
    try {
      pt.c = solve_design(p, start_point(ai, p), a.seed, {}, &pt.r);
      pt.ok = true;
    } catch (const NonConvergenceError& e) {
      pt.c = WaveformCoefficients::from_packed(omega0, e.best_iterate());
      pt.r = design_report(pt.c, p);
    }
    const Vec w = p.basis * pt.c.packed();
    const Vec dr = dephasing_robust(s.T, static_cast<int>(ms[static_cast<std::size_t>(i)]), 1, s.N).samples;
    pt.dist = std::min((w - dr).norm(), (w + dr).norm()) / dr.norm();
  });

  CsvTable t, coeffs;
  t.comments = {"converged: 1 when F_Z(0)/T^2 < 1e-9 and all constraints hold"};
  t.columns = {"omega0_mhz", "converged", "objective_over_T2", "fz0_over_T2", "peak_over_max", "distance_to_dr",
               "retained_rows"};
  coeffs.columns = {"omega0_mhz"};
  for (long k = 0; k < a.K; ++k) coeffs.columns.push_back("cos_" + std::to_string(k));
  for (long k = 0; k < a.K; ++k) coeffs.columns.push_back("sin_" + std::to_string(k));
  t.data.resize(static_cast<Index>(pts.size()), 7);
  coeffs.data.resize(static_cast<Index>(pts.size()), 1 + 2 * a.K);
  json status = json::object();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& pt = pts[i];
    const auto r = static_cast<Index>(i);
    t.data.row(r) << to_mhz(pt.c.omega0), pt.ok ? 1.0 : 0.0, pt.r.objective / T2, pt.r.fz0_over_T2,
        pt.r.peak_over_max, pt.dist, static_cast<double>(pt.rows);
    coeffs.data(r, 0) = to_mhz(pt.c.omega0);
    coeffs.data.row(r).tail(2 * a.K) = pt.c.packed().transpose();
    status[json(to_mhz(pt.c.omega0)).dump()] = pt.ok ? "converged" : "nonconverged";
  }
  aw.csv("sweep.csv", t);
  aw.csv("sweep_coefficients.csv", coeffs);
  aw.set("outcome", status);
  aw.finish();
  return 0;
}

// ---- simulate / reconstruct ----

struct SimulationConfig {
  QnsDesign design;
  SpectrumModel amp;
  json dephasing_block;
  std::string sweep_parameter;
  std::vector<double> sweep_values;
  long realizations = 500;
  std::uint64_t seed = 1;
  long oversample = 8;
  long shots = 0;
};

SimulationConfig parse_simulation(const json& cfg) {
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  SimulationConfig c;
  c.design = cli::design_from(cfg);
  c.amp = cli::amplitude_from(cfg.value("amplitude", json::object()), "amplitude");
  c.dephasing_block = cfg.value("dephasing", json{{"type", "none"}});
  (void)cli::dephasing_from(c.dephasing_block, "dephasing");
  if (cfg.contains("sweep")) {
    const json& sw = cfg.at("sweep");
    if (!sw.is_object()) throw ConfigError("config field 'sweep' must be an object");
    c.sweep_parameter = cli::text(sw, "parameter", "sweep", "");
    c.sweep_values = cli::numbers(sw, "values", "sweep");
    if (c.sweep_values.empty()) throw ConfigError("config field 'sweep.values' must be a non-empty array");
    for (double v : c.sweep_values)
      (void)cli::dephasing_from(cli::with_sweep_value(c.dephasing_block, c.sweep_parameter, v), "sweep.values");
  }
  c.realizations = cli::integer(cfg, "realizations", "", 1, c.realizations);
  c.seed = static_cast<std::uint64_t>(cli::integer(cfg, "seed", "", 0, static_cast<long>(c.seed)));
  c.oversample = cli::integer(cfg, "oversample", "", 1, c.oversample);
  c.shots = cli::integer(cfg, "shots", "", 0, c.shots);
  return c;
}

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read config file " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + p.string() + " is not valid JSON: " + e.what());
  }
}

int cmd_simulate(const fs::path& config, std::optional<std::uint64_t> seed, std::optional<long> realizations,
                 const fs::path& out) {
  json cfg = read_json_file(config);
  if (seed) cfg["seed"] = *seed;
  if (realizations) cfg["realizations"] = *realizations;
  const SimulationConfig c = parse_simulation(cfg);
  ArtifactWriter aw(out, "simulate", cfg, c.seed);

  std::vector<double> values = c.sweep_values;
  if (values.empty()) values.push_back(0.0);
  SimulationOptions so;
  so.oversample = c.oversample;
  so.shots = static_cast<int>(c.shots);
  const auto waves = qns_waveforms(c.design);

  CsvTable t;
  t.comments = {"family=" + cli::family_name(c.design.family), "sweep_parameter=" + c.sweep_parameter};
  t.columns = {"sweep_index", "sweep_value", "lambda_mhz", "p1", "p2", "p3", "p1_err", "p2_err", "p3_err",
               "estimator", "estimator_err", "i_omega_pred"};
  const Index L = c.design.L;
  t.data.resize(static_cast<Index>(values.size()) * L, 12);
  Vec pred(L);
  parallel_for(L, [&](Index r) { pred[r] = overlap_amplitude(waves[static_cast<std::size_t>(r)], c.amp); });
  for (std::size_t s = 0; s < values.size(); ++s) {
    const json block = c.sweep_parameter.empty() ? c.dephasing_block
                                                 : cli::with_sweep_value(c.dephasing_block, c.sweep_parameter, values[s]);
    const QnsRunRecord rec = run_qns(c.design, c.amp, cli::dephasing_from(block, "dephasing"), c.realizations, c.seed, so);
    for (Index r = 0; r < L; ++r) {
      const auto& tr = rec.survival[static_cast<std::size_t>(r)];
      t.data.row(static_cast<Index>(s) * L + r) << static_cast<double>(s), values[s], to_mhz(rec.lambdas[r]), tr.p[0],
          tr.p[1], tr.p[2], tr.p_err[0], tr.p_err[1], tr.p_err[2], tr.estimator, tr.estimator_err, pred[r];
    }
  }
  aw.csv("simulate.csv", t);
  aw.finish();
  return 0;
}

int cmd_reconstruct(const fs::path& input, bool weighted, const fs::path& out) {
  const json manifest = read_json_file(input / "manifest.json");
  if (manifest.value("command", "") != "simulate" || manifest.value("status", "") != "complete")
    throw ConfigError("--input must be a completed simulate output directory");
  const json cfg = manifest.at("config");
  const SimulationConfig c = parse_simulation(cfg);
  const CsvTable sim = read_csv(input / "simulate.csv");
  ArtifactWriter aw(out, "reconstruct", {{"input_config_hash", manifest.at("config_hash")}, {"weighted", weighted}},
                    c.seed);

  const OverlapMatrix A = overlap_matrix(qns_waveforms(c.design), c.design.L, c.design.dw());
  const Vec truth = true_spectrum(c.amp, A);
  const Index L = c.design.L;
  const Index groups = sim.data.rows() / L;
  if (groups * L != sim.data.rows()) throw ConfigError("simulate.csv row count is not a multiple of L");
  const Index ce = sim.column("estimator"), cs = sim.column("sweep_value"), cerr = sim.column("estimator_err");

  CsvTable rec, err;
  rec.columns = {"sweep_index", "sweep_value", "omega_over_2pi_mhz", "s_omega_est", "s_omega_true"};
  err.comments = {"in-band: band centre below the amplitude cutoff"};
  err.columns = {"sweep_index", "sweep_value", "median_rel_error", "median_abs_rel_error", "residual_norm",
                 "condition"};
  rec.data.resize(groups * L, 5);
  err.data.resize(groups, 6);
  json summary = json::array();
  for (Index g = 0; g < groups; ++g) {
    const Vec y = sim.data.block(g * L, ce, L, 1);
    std::optional<Vec> w;
    if (weighted) w = sim.data.block(g * L, cerr, L, 1).cwiseMax(1e-300).cwiseInverse();
    const ReconstructionResult r = reconstruct(y, A, truth, w);
    const double v = sim.data(g * L, cs);
    for (Index l = 0; l < L; ++l)
      rec.data.row(g * L + l) << static_cast<double>(g), v, to_mhz(r.frequencies[l]), r.estimate[l], truth[l];
    const double limit = c.amp.cutoff();
    err.data.row(g) << static_cast<double>(g), v, r.median_relative_error(limit), r.median_abs_relative_error(limit),
        r.residual_norm, r.condition;
    summary.push_back({{"sweep_value", v},
                       {"residual_norm", r.residual_norm},
                       {"condition", r.condition},
                       {"min_diagonal_fraction", r.min_diagonal_fraction},
                       {"median_abs_rel_error_in_band", r.median_abs_relative_error(limit)}});
  }
  aw.csv("reconstruction.csv", rec);
  aw.csv("errors.csv", err);
  aw.json("summary.json", summary);
  aw.finish();
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dephasing-robust waveform design and amplitude-noise spectroscopy"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  fs::path out;
  auto add_out = [&](CLI::App* s) { s->add_option("--out", out, "output directory (default $QNS_OUT_DIR/<command>)"); };

  long dpss_N = 2000, dpss_K = 3;
  double dpss_NW = 1.0;
  auto* s_dpss = app.add_subcommand("dpss", "Slepian sequences and concentrations");
  s_dpss->add_option("--N", dpss_N)->check(CLI::Range(2L, 100000000L));
  s_dpss->add_option("--NW", dpss_NW)->check(CLI::PositiveNumber);
  s_dpss->add_option("--K", dpss_K)->check(CLI::Range(1L, 1000L));
  add_out(s_dpss);

  WaveformArgs wf;
  auto* s_wave = app.add_subcommand("waveform", "synthesize a dr or modulated-Slepian waveform");
  wf.add_to(s_wave);
  add_out(s_wave);

  WaveformArgs ffa;
  double ff_max_mhz = 2.0;
  int ff_ppl = 16;
  auto* s_ff = app.add_subcommand("ff", "amplitude and dephasing filter functions");
  ffa.add_to(s_ff);
  s_ff->add_option("--max-mhz", ff_max_mhz, "highest frequency written")->check(CLI::PositiveNumber);
  s_ff->add_option("--points-per-linewidth", ff_ppl, "grid points per 2 pi / T")->check(CLI::Range(1, 1024));
  add_out(s_ff);

  WaveformArgs gza;
  gza.N = 2000;
  long gz_span = 30;
  auto* s_gz = app.add_subcommand("gz", "higher-order dephasing filter on the 2 pi l / T grid");
  gza.add_to(s_gz);
  s_gz->add_option("--span", gz_span, "grid indices l in [-span, span] on both axes")->check(CLI::Range(1L, 2000L));
  add_out(s_gz);

  long pr_N = 40000, pr_K = 1;
  double pr_NW = 1.0, pr_omega0 = 0.1, pr_T = 100.0, pr_eps = 0.1;
  std::uint64_t pr_seed = 1;
  auto* s_prune = app.add_subcommand("prune", "LP reduction of the peak-amplitude constraints");
  s_prune->add_option("--N", pr_N)->check(CLI::Range(2L, 100000000L));
  s_prune->add_option("--K", pr_K)->check(CLI::Range(1L, 100L));
  s_prune->add_option("--NW", pr_NW)->check(CLI::PositiveNumber);
  s_prune->add_option("--omega0-mhz", pr_omega0)->check(CLI::NonNegativeNumber);
  s_prune->add_option("--T-us", pr_T)->check(CLI::PositiveNumber);
  s_prune->add_option("--eps", pr_eps)->check(CLI::Range(0.0, 10.0));
  s_prune->add_option("--seed", pr_seed);
  add_out(s_prune);

  OptimizeArgs oa;
  auto* s_opt = app.add_subcommand("optimize", "constrained waveform design");
  s_opt->add_option("--omega0-mhz", oa.omega0_mhz)->check(CLI::PositiveNumber);
  s_opt->add_option("--K", oa.K)->check(CLI::Range(1L, 100L));
  s_opt->add_option("--NW", oa.NW)->check(CLI::PositiveNumber);
  s_opt->add_option("--omega-max-mhz", oa.omega_max_mhz)->check(CLI::PositiveNumber);
  s_opt->add_option("--eps", oa.eps)->check(CLI::Range(0.0, 10.0));
  s_opt->add_option("--seed", oa.seed);
  s_opt->add_option("--N", oa.N)->check(CLI::Range(2L, 100000000L));
  s_opt->add_option("--T-us", oa.T_us)->check(CLI::PositiveNumber);
  s_opt->add_option("--delta-omega-khz", oa.delta_omega_khz, "objective regularization / 2pi")->check(CLI::PositiveNumber);
  s_opt->add_option("--start", oa.start)->check(CLI::IsMember({"dr", "dpss", "random"}));
  s_opt->add_option("--sweep", oa.sweep, "solve at omega0 = m 2 pi / T for m = 1..S")->check(CLI::NonNegativeNumber);
  s_opt->add_option("--sweep-list", oa.sweep_list, "explicit m values")->delimiter(',');
  add_out(s_opt);

  fs::path sim_config;
  std::optional<std::uint64_t> sim_seed;
  std::optional<long> sim_real;
  auto* s_sim = app.add_subcommand("simulate", "Monte-Carlo survival probabilities per modulation frequency");
  s_sim->add_option("--config", sim_config, "run JSON")->required();
  s_sim->add_option("--seed", sim_seed);
  s_sim->add_option("--realizations", sim_real)->check(CLI::PositiveNumber);
  add_out(s_sim);

  fs::path rec_input;
  bool rec_weighted = false;
  auto* s_rec = app.add_subcommand("reconstruct", "NNLS reconstruction from a simulate output directory");
  s_rec->add_option("--input", rec_input, "simulate output directory")->required();
  s_rec->add_flag("--weighted", rec_weighted, "weight rows by 1 / standard error");
  add_out(s_rec);

  cli::FigureOptions fo;
  std::string fo_only;
  auto* s_fig = app.add_subcommand("figure-data", "tidy CSVs behind the waveform, filter, bias and reconstruction figures");
  s_fig->add_option("--scale", fo.scale, "desk (T = 20 us, L = 40) or full (T = 100 us, L = 200)")->check(CLI::IsMember({"desk", "full"}));
  s_fig->add_option("--only", fo_only, "comma-separated subset of figure tables");
  s_fig->add_option("--realizations", fo.realizations)->check(CLI::PositiveNumber);
  s_fig->add_option("--N", fo.N)->check(CLI::Range(2L, 100000000L));
  s_fig->add_option("--L", fo.L)->check(CLI::Range(1L, 100000L));
  s_fig->add_option("--optimize-N", fo.optimize_N)->check(CLI::Range(2L, 100000000L));
  s_fig->add_option("--seed", fo.seed);
  add_out(s_fig);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  worker_threads() = threads;

  CLI::App* sub = app.get_subcommands().front();
  if (out.empty()) out = cli::default_out_dir() / sub->get_name();

  try {
    if (sub == s_dpss) return cmd_dpss(dpss_N, dpss_NW, dpss_K, out);
    if (sub == s_wave) return cmd_waveform(wf, out);
    if (sub == s_ff) return cmd_ff(ffa, ff_max_mhz, ff_ppl, out);
    if (sub == s_gz) return cmd_gz(gza, gz_span, out);
    if (sub == s_prune) return cmd_prune(pr_N, pr_K, pr_NW, pr_omega0, pr_T, pr_eps, pr_seed, out);
    if (sub == s_opt) return cmd_optimize(oa, out);
    if (sub == s_sim) return cmd_simulate(sim_config, sim_seed, sim_real, out);
    if (sub == s_rec) return cmd_reconstruct(rec_input, rec_weighted, out);
    if (sub == s_fig) {
      std::stringstream ss(fo_only);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) fo.only.push_back(item);
      return cli::figure_data(fo, out);
    }
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const GridError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ModelTypeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
