#include "qns/io.hpp"

#include <Eigen/Core>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qns {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// write-then-rename so a reader never sees half a file
void write_atomic(const fs::path& p, const std::string& body) {
  const fs::path tmp = p.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

} // namespace

Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<Index>(i);
  throw ParameterError("csv: no column named '" + name + "'");
}

std::string format_csv(const CsvTable& t) {
  if (t.data.cols() != static_cast<Index>(t.columns.size()) && t.data.size() > 0)
    throw ParameterError("csv: column count does not match the data");
  std::string s;
  for (const auto& c : t.comments) s += "# " + c + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (Index r = 0; r < t.data.rows(); ++r) {
    for (Index c = 0; c < t.data.cols(); ++c) s += (c ? "," : "") + num(t.data(r, c));
    s += "\n";
  }
  return s;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = false;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!header) t.comments.push_back(trim(line.substr(1)));
      continue;
    }
    const auto cells = split(line, ',');
    if (!header) {
      for (const auto& c : cells) t.columns.push_back(trim(c));
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw ParameterError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                           " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      const std::string v = trim(c);
      double x = 0.0;
      try {
        x = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.size() || v.empty()) throw ParameterError("csv line " + std::to_string(lineno) + ": bad number '" + v + "'");
      row.push_back(x);
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw ParameterError("csv: no header line");
  t.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.data(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return t;
}

CsvTable read_csv(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParameterError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ArtifactWriter::ArtifactWriter(fs::path dir, std::string command, nlohmann::json config, std::uint64_t seed)
    : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  manifest_ = {
      {"tool", "qns"},
      {"command", std::move(command)},
      {"status", "running"},
      {"seed", seed},
      {"config_hash", config_hash(config)},
      {"config", std::move(config)},
      {"versions",
       {{"qns", version_string},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__}}},
      {"artifacts", nlohmann::json::array()},
  };
  flush_manifest();
}

void ArtifactWriter::write_file(const std::string& name, const std::string& body, const std::string& kind) {
  if (name == "manifest.json" || name.find('/') != std::string::npos)
    throw ParameterError("artifact name must be a plain file name other than manifest.json");
  write_atomic(dir_ / name, body);
  manifest_["artifacts"].push_back({{"file", name}, {"kind", kind}, {"bytes", body.size()}});
  flush_manifest();
}

void ArtifactWriter::csv(const std::string& name, const CsvTable& t) { write_file(name, format_csv(t), "csv"); }

void ArtifactWriter::json(const std::string& name, const nlohmann::json& j) {
  write_file(name, j.dump(2) + "\n", "json");
}

ArtifactWriter::~ArtifactWriter() {
  if (finished_) return;
  try {
    manifest_["status"] = "incomplete";
    flush_manifest();
  } catch (...) {
  }
}

void ArtifactWriter::set(const std::string& key, nlohmann::json value) {
  manifest_[key] = std::move(value);
  flush_manifest();
}

void ArtifactWriter::finish() {
  manifest_["status"] = "complete";
  flush_manifest();
  finished_ = true;
}

void ArtifactWriter::flush_manifest() const { write_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

std::string manifest_status(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) return "missing";
  return nlohmann::json::parse(in).value("status", "missing");
}

CsvTable waveform_table(const PiecewiseConstantWaveform& w, const std::vector<std::string>& generator) {
  CsvTable t;
  t.comments = {"dt_s=" + num(w.dt), "N=" + std::to_string(w.size())};
  t.comments.insert(t.comments.end(), generator.begin(), generator.end());
  t.columns = {"t_start_s", "omega_rad_per_s"};
  t.data.resize(w.size(), 2);
  for (Index m = 0; m < w.size(); ++m) t.data.row(m) << w.dt * static_cast<double>(m), w.samples[m];
  return t;
}

PiecewiseConstantWaveform waveform_from_table(const CsvTable& t) {
  const Index c = t.column("omega_rad_per_s");
  for (const auto& line : t.comments)
    if (line.rfind("dt_s=", 0) == 0) return PiecewiseConstantWaveform(t.data.col(c), std::stod(line.substr(5)));
  const Index ts = t.column("t_start_s");
  if (t.data.rows() < 2) throw ParameterError("waveform csv: cannot infer dt");
  return PiecewiseConstantWaveform(t.data.col(c), t.data(1, ts) - t.data(0, ts));
}

CsvTable ff_table(const FilterFunctionGrid& g) {
  CsvTable t;
  t.comments = {"T_s=" + num(g.total_time)};
  t.columns = {"omega_rad_per_s", "value", "omega_over_2pi_mhz"};
  t.data.resize(g.omegas.size(), 3);
  t.data.col(0) = g.omegas;
  t.data.col(1) = g.values;
  t.data.col(2) = g.omegas / mhz(1.0);
  return t;
}

CsvTable gz_table(const HigherOrderFFGrid& g) {
  CsvTable t;
  t.comments = {"T_s=" + num(g.total_time)};
  t.columns = {"omega", "omega_prime", "re", "im", "omega_mhz", "omega_prime_mhz"};
  t.data.resize(g.omegas.size() * g.omegas_prime.size(), 6);
  Index r = 0;
  for (Index i = 0; i < g.omegas.size(); ++i)
    for (Index j = 0; j < g.omegas_prime.size(); ++j, ++r)
      t.data.row(r) << g.omegas[i], g.omegas_prime[j], g.values(i, j).real(), g.values(i, j).imag(),
          to_mhz(g.omegas[i]), to_mhz(g.omegas_prime[j]);
  return t;
}

CsvTable constraints_table(const AffineConstraintSet& s) {
  CsvTable t;
  t.comments = {"rows a with a . u <= 1, u = coefficients / omega_max"};
  for (Index i = 0; i < s.dim(); ++i) t.columns.push_back("a_" + std::to_string(i));
  t.data = s.rows;
  return t;
}

} // namespace qns
