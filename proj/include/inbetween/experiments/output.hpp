#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "inbetween/experiments/config.hpp"

namespace inbetween {

/// Column-named table. Numbers are written with the shortest round-trip
/// representation, so equal inputs give byte-identical files.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(const std::vector<double>& values);
  /// Mixed row, cells already formatted.
  void add_text_row(std::vector<std::string> cells);

  [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }
  [[nodiscard]] std::string to_string() const;
  void write(const std::filesystem::path& path) const;

  static std::string cell(double v);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// "<method>_<depth>_<seed>" (plus ".<kind>" for auxiliary tables).
std::string cell_stem(std::string_view method, std::size_t depth, std::uint64_t seed,
                      std::string_view kind = {});

/// Version string baked in at configure time.
std::string_view build_version();

/// Collects the files and per-cell status of one experiment and writes
/// `<outdir>/<experiment>/manifest.json`. With an empty outdir nothing is
/// written and only the in-memory record is kept.
class RunRecorder {
 public:
  RunRecorder(std::filesystem::path outdir, std::string experiment, nlohmann::json config);

  [[nodiscard]] bool writes() const noexcept { return !outdir_.empty(); }
  [[nodiscard]] std::filesystem::path dir() const;

  /// Writes `<stem>.csv` under the experiment directory and records it.
  void table(const std::string& stem, const CsvTable& t);
  void cell(std::string_view method, std::size_t depth, std::uint64_t seed, bool ok,
            const std::string& error, nlohmann::json info);
  void summary(nlohmann::json s);

  [[nodiscard]] const nlohmann::json& cells() const noexcept { return cells_; }
  [[nodiscard]] const std::vector<std::string>& files() const noexcept { return files_; }
  /// Writes the manifest (if writing) and returns it.
  nlohmann::json finish();

 private:
  std::filesystem::path outdir_;
  std::string experiment_;
  nlohmann::json config_;
  nlohmann::json cells_ = nlohmann::json::array();
  nlohmann::json summary_ = nlohmann::json::object();
  std::vector<std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace inbetween
