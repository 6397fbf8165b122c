#include "detail.hpp"

namespace inbetween {

bool TheoremSweepResult::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const FuzzSummary& s) { return s.passed(); });
}

TheoremSweepResult run_check_theorems(const ExperimentConfig& cfg, const FuzzConfig& fuzz) {
  nlohmann::json config = to_json(cfg);
  config["fuzz"] = {{"nets", fuzz.nets},
                    {"probes_per_net", fuzz.probes_per_net},
                    {"width", fuzz.width},
                    {"seed", fuzz.seed},
                    {"tol", fuzz.tol}};
  RunRecorder rec(cfg.outdir, "check-theorems", config);
  TheoremSweepResult out;
  out.suites.push_back(fuzz_thm1(fuzz));
  out.suites.push_back(fuzz_hypercube(fuzz, 2));
  out.suites.push_back(fuzz_hypercube(fuzz, 3));
  out.suites.push_back(fuzz_convexity(fuzz));

  CsvTable t({"check", "nets", "checks", "violations", "worst_violation", "tolerance", "passed"});
  nlohmann::json suites = nlohmann::json::array();
  for (const FuzzSummary& s : out.suites) {
    t.add_text_row({s.check, std::to_string(s.nets), std::to_string(s.checks),
                    std::to_string(s.violations), CsvTable::cell(s.worst.max_violation),
                    CsvTable::cell(s.worst.tolerance), s.passed() ? "1" : "0"});
    suites.push_back(to_json(s));
  }
  rec.table("summary", t);
  rec.summary({{"suites", suites}, {"passed", out.passed()}});
  out.manifest = rec.finish();
  return out;
}

}  // namespace inbetween
