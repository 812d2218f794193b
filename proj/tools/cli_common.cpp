#include "cli_common.hpp"

#include <cmath>
#include <cstdlib>

namespace cli {

namespace {

std::string at(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

} // namespace

double number(const json& j, const std::string& key, const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("config field '" + at(where, key) + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("config field '" + at(where, key) + "' must be finite");
  return x;
}

double positive(const json& j, const std::string& key, const std::string& where, double fallback) {
  const double x = number(j, key, where, fallback);
  if (!(x > 0.0)) throw ConfigError("config field '" + at(where, key) + "' must be positive");
  return x;
}

long integer(const json& j, const std::string& key, const std::string& where, long lo, long fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("config field '" + at(where, key) + "' must be an integer");
  const long x = v.get<long>();
  if (x < lo) throw ConfigError("config field '" + at(where, key) + "' must be >= " + std::to_string(lo));
  return x;
}

std::string text(const json& j, const std::string& key, const std::string& where, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError("config field '" + at(where, key) + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return {};
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError("config field '" + at(where, key) + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("config field '" + at(where, key) + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

qns::WaveformFamily family_from(const std::string& name, const std::string& where) {
  if (name == "dr") return qns::WaveformFamily::dephasing_robust;
  if (name == "dpss") return qns::WaveformFamily::dpss;
  throw ConfigError("config field '" + where + "' must be \"dr\" or \"dpss\"");
}

std::string family_name(qns::WaveformFamily f) { return f == qns::WaveformFamily::dpss ? "dpss" : "dr"; }

qns::QnsDesign design_from(const json& cfg) {
  qns::QnsDesign d;
  d.family = family_from(text(cfg, "family", "", "dr"), "family");
  d.N = integer(cfg, "N", "", 2, d.N);
  d.T = positive(cfg, "T_us", "", d.T * 1e6) * 1e-6;
  d.L = integer(cfg, "L", "", 1, d.L);
  d.omega_max = qns::mhz(positive(cfg, "omega_max_mhz", "", qns::to_mhz(d.omega_max)));
  d.NW = positive(cfg, "NW", "", d.NW);
  if (cfg.contains("delta_omega_mhz")) d.delta_omega = qns::mhz(positive(cfg, "delta_omega_mhz", "", 0.0));
  const double cycles = d.dw() * d.T / qns::two_pi;
  if (std::abs(cycles - std::round(cycles)) > 1e-9 * cycles || cycles < 0.5)
    throw ConfigError("config field 'delta_omega_mhz' must be a positive multiple of 1 / T");
  if ((static_cast<double>(d.L) + 0.5) * d.dw() > qns::pi * static_cast<double>(d.N) / d.T)
    throw ConfigError("config fields 'L', 'N': L * delta_omega exceeds the Nyquist frequency");
  return d;
}

json design_to_json(const qns::QnsDesign& d) {
  return {{"family", family_name(d.family)},   {"N", d.N},   {"T_us", d.T * 1e6},
          {"L", d.L},   {"omega_max_mhz", qns::to_mhz(d.omega_max)}, {"NW", d.NW},
          {"delta_omega_mhz", qns::to_mhz(d.dw())}};
}

qns::SpectrumModel amplitude_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config field '" + where + "' must be an object");
  const double a = number(j, "a_omega", where, 1.04e-11);
  if (a < 0.0) throw ConfigError("config field '" + at(where, "a_omega") + "' must be >= 0");
  return qns::SpectrumModel::flat(a, qns::mhz(positive(j, "omega_h_mhz", where, 2.0)));
}

qns::SpectrumModel dephasing_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config field '" + where + "' must be an object");
  const std::string type = text(j, "type", where, "none");
  if (type == "none") return qns::SpectrumModel::none();
  if (type == "detuning") return qns::SpectrumModel::detuning(qns::mhz(number(j, "delta_mhz", where, 0.0)));
  if (type == "one_over_f") {
    const double c = number(j, "C", where, 0.0);
    if (c < 0.0) throw ConfigError("config field '" + at(where, "C") + "' must be >= 0");
    const double lo = qns::mhz(positive(j, "omega_l_mhz", where, 0.01));
    const double hi = qns::mhz(positive(j, "omega_h_mhz", where, 2.0));
    if (!(hi > lo)) throw ConfigError("config field '" + at(where, "omega_h_mhz") + "' must exceed omega_l_mhz");
    return qns::SpectrumModel::one_over_f(c, positive(j, "a_z", where, 1e8), lo, hi);
  }
  throw ConfigError("config field '" + at(where, "type") + "' must be \"none\", \"detuning\" or \"one_over_f\"");
}

json with_sweep_value(json dephasing, const std::string& parameter, double value) {
  if (parameter == "delta_mhz") {
    dephasing["type"] = "detuning";
    dephasing["delta_mhz"] = value;
  } else if (parameter == "C") {
    dephasing["type"] = "one_over_f";
    dephasing["C"] = value;
  } else {
    throw ConfigError("config field 'sweep.parameter' must be \"delta_mhz\" or \"C\"");
  }
  return dephasing;
}

std::filesystem::path default_out_dir() {
  const char* env = std::getenv("QNS_OUT_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("qns_out");
}

} // namespace cli
