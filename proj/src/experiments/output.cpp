#include "inbetween/experiments/output.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#ifndef INBETWEEN_VERSION
#define INBETWEEN_VERSION "unknown"
#endif

namespace inbetween {

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("CSV table needs at least one column");
}

std::string CsvTable::cell(double v) { return fmt::format("{}", v); }

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(cell(v));
  add_text_row(std::move(cells));
}

void CsvTable::add_text_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw std::invalid_argument(
        fmt::format("CSV row has {} cells, table has {} columns", cells.size(), columns_.size()));
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::string out;
  auto append = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append(columns_);
  for (const auto& r : rows_) append(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  os << to_string();
  if (!os) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

std::string cell_stem(std::string_view method, std::size_t depth, std::uint64_t seed,
                      std::string_view kind) {
  std::string s = fmt::format("{}_{}_{}", method, depth, seed);
  if (!kind.empty()) s += fmt::format(".{}", kind);
  return s;
}

std::string_view build_version() { return INBETWEEN_VERSION; }

RunRecorder::RunRecorder(std::filesystem::path outdir, std::string experiment,
                         nlohmann::json config)
    : outdir_(std::move(outdir)),
      experiment_(std::move(experiment)),
      config_(std::move(config)),
      start_(std::chrono::steady_clock::now()) {}

std::filesystem::path RunRecorder::dir() const { return outdir_ / experiment_; }

void RunRecorder::table(const std::string& stem, const CsvTable& t) {
  const std::string name = stem + ".csv";
  if (writes()) t.write(dir() / name);
  files_.push_back(name);
}

void RunRecorder::cell(std::string_view method, std::size_t depth, std::uint64_t seed, bool ok,
                       const std::string& error, nlohmann::json info) {
  nlohmann::json c = {{"method", method},
                      {"depth", depth},
                      {"seed", seed},
                      {"status", ok ? "ok" : "failed"},
                      {"info", std::move(info)}};
  if (!ok) c["error"] = error;
  cells_.push_back(std::move(c));
}

void RunRecorder::summary(nlohmann::json s) { summary_ = std::move(s); }

nlohmann::json RunRecorder::finish() {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  nlohmann::json m = {{"experiment", experiment_},
                      {"version", build_version()},
                      {"wall_time_seconds", wall},
                      {"config", config_},
                      {"cells", cells_},
                      {"files", files_},
                      {"summary", summary_}};
  if (writes()) {
    std::filesystem::create_directories(dir());
    std::ofstream os(dir() / "manifest.json");
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", (dir() / "manifest.json").string()));
    os << m.dump(2) << '\n';
  }
  return m;
}

}  // namespace inbetween
