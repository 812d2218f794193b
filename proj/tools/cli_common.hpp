#pragma once

#include "qns/core.hpp"
#include "qns/io.hpp"
#include "qns/noisegen.hpp"
#include "qns/spectro.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cli {

using nlohmann::json;

/// Bad user input; maps to exit status 2.
class ConfigError : public qns::ParameterError {
public:
  using qns::ParameterError::ParameterError;
};

/// Field-level reads from a JSON config; `where` is the dotted path used in diagnostics.
double number(const json& j, const std::string& key, const std::string& where, double fallback);
double positive(const json& j, const std::string& key, const std::string& where, double fallback);
long integer(const json& j, const std::string& key, const std::string& where, long lo, long fallback);
std::string text(const json& j, const std::string& key, const std::string& where, const std::string& fallback);
std::vector<double> numbers(const json& j, const std::string& key, const std::string& where);

qns::WaveformFamily family_from(const std::string& name, const std::string& where);
std::string family_name(qns::WaveformFamily f);

/// QnsDesign from {"family", "N", "T_us", "L", "omega_max_mhz", "NW", "delta_omega_mhz"}.
qns::QnsDesign design_from(const json& cfg);
json design_to_json(const qns::QnsDesign& d);

/// {"a_omega", "omega_h_mhz"}.
qns::SpectrumModel amplitude_from(const json& j, const std::string& where);
/// {"type": "none" | "detuning" | "one_over_f", "delta_mhz", "C", "a_z", "omega_l_mhz", "omega_h_mhz"}.
qns::SpectrumModel dephasing_from(const json& j, const std::string& where);

/// Applies one sweep value ("delta_mhz" or "C") to a dephasing block.
json with_sweep_value(json dephasing, const std::string& parameter, double value);

/// $QNS_OUT_DIR when set, otherwise ./qns_out.
std::filesystem::path default_out_dir();

/// figure-data entry point; returns the process exit status.
struct FigureOptions {
  std::string scale = "desk";
  std::vector<std::string> only;
  long realizations = -1; // -1: scale default
  long N = -1;
  long L = -1;
  long optimize_N = -1;
  std::uint64_t seed = 1;
};
int figure_data(const FigureOptions& opt, const std::filesystem::path& out);

} // namespace cli
