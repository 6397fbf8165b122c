#pragma once

#include <filesystem>

#include <json.hpp>

#include "inbetween/bnn/network.hpp"

namespace inbetween {

// Self-describing JSON: {"kind", "spec", "layers": [{name: {"rows", "cols",
// "data"}}]} with row-major data. MCDO adds "p" and "drop_inputs".

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ParamDist& q);
nlohmann::json to_json(const NetworkParams& theta);
ParamDist dist_from_json(const nlohmann::json& j);
NetworkParams params_from_json(const nlohmann::json& j);

void save_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace inbetween
