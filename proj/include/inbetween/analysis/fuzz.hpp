#pragma once

// Randomised sweeps of the bound checks. Parameter scales are drawn
// log-uniformly so that sweeps cover nearly deterministic nets as well as
// very noisy ones.

#include <json.hpp>

#include "inbetween/analysis/bounds.hpp"

namespace inbetween {

FFGParams random_ffg_net(const NetworkSpec& spec, RngStream& rng);
MCDOParams random_mcdo_net(const NetworkSpec& spec, double p, bool drop_inputs, RngStream& rng);

/// Random line with direction_d * offset_d == 0 for every d and a lambda range
/// straddling zero.
LineProbe random_orthogonal_probe(std::size_t dim, RngStream& rng, std::size_t points = 41);

struct FuzzConfig {
  std::size_t nets = 1000;
  std::size_t probes_per_net = 10;
  std::size_t width = 50;
  std::uint64_t seed = 0;
  double tol = 1e-9;
};

struct FuzzSummary {
  std::string check;
  std::size_t nets = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  BoundReport worst;

  [[nodiscard]] bool passed() const noexcept { return violations == 0; }
};
nlohmann::json to_json(const FuzzSummary& s);

/// FFG line-bound probes on random 1HL FFG nets with input dims cycling 1..3.
FuzzSummary fuzz_thm1(const FuzzConfig& cfg);
/// Hypercube corollary on random 1HL FFG nets with input dimension `dim`.
FuzzSummary fuzz_hypercube(const FuzzConfig& cfg, std::size_t dim);
/// Segment convexity on random 1HL MCDO nets (inputs kept).
FuzzSummary fuzz_convexity(const FuzzConfig& cfg);

}  // namespace inbetween
