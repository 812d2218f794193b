#pragma once

#include "qns/core.hpp"
#include "qns/filterfn.hpp"
#include "qns/lp_reduce.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qns {

inline constexpr const char* version_string = "1.0.0";

/// Column-named numeric table; '#' lines before the header are free-form comments.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  Eigen::MatrixXd data;

  Index column(const std::string& name) const; // throws ParameterError when absent
};

/// %.17g for every value, '\n' line endings: identical inputs give identical bytes.
std::string format_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& p);

/// FNV-1a 64 of the compact JSON dump (keys are sorted by the json type), as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Writes artifacts into one directory and keeps manifest.json in step.
/// The manifest is created with status "running" and flips to "complete" on finish().
/// A writer destroyed before finish() leaves status "incomplete".
class ArtifactWriter {
public:
  ArtifactWriter(std::filesystem::path dir, std::string command, nlohmann::json config, std::uint64_t seed);
  ~ArtifactWriter();
  ArtifactWriter(const ArtifactWriter&) = delete;
  ArtifactWriter& operator=(const ArtifactWriter&) = delete;

  void csv(const std::string& name, const CsvTable& t);
  void json(const std::string& name, const nlohmann::json& j);
  /// Extra top-level manifest entry, e.g. a numerical outcome.
  void set(const std::string& key, nlohmann::json value);
  void finish();

  const std::filesystem::path& dir() const noexcept { return dir_; }
  const nlohmann::json& manifest() const noexcept { return manifest_; }

private:
  void write_file(const std::string& name, const std::string& body, const std::string& kind);
  void flush_manifest() const;

  std::filesystem::path dir_;
  nlohmann::json manifest_;
  bool finished_ = false;
};

/// Status of a manifest on disk; "missing" when there is none.
std::string manifest_status(const std::filesystem::path& dir);

CsvTable waveform_table(const PiecewiseConstantWaveform& w, const std::vector<std::string>& generator);
PiecewiseConstantWaveform waveform_from_table(const CsvTable& t);
CsvTable ff_table(const FilterFunctionGrid& g);
CsvTable gz_table(const HigherOrderFFGrid& g);
CsvTable constraints_table(const AffineConstraintSet& s);

} // namespace qns
