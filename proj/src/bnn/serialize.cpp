#include "inbetween/bnn/serialize.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace inbetween {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.flat().begin(), m.flat().end())}};
}

Matrix matrix_from_json(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

json to_json(const NetworkSpec& spec) {
  return {{"input_dim", spec.input_dim},
          {"hidden", spec.hidden},
          {"output_dim", spec.output_dim},
          {"activation", "relu"}};
}

NetworkSpec spec_from_json(const json& j) {
  if (j.value("activation", std::string("relu")) != "relu") {
    throw std::invalid_argument("only ReLU networks are supported");
  }
  NetworkSpec spec{j.at("input_dim").get<std::size_t>(),
                   j.at("hidden").get<std::vector<std::size_t>>(),
                   j.at("output_dim").get<std::size_t>()};
  spec.validate();
  return spec;
}

json to_json(const ParamDist& q) {
  json layers = json::array();
  json out;
  if (const auto* f = std::get_if<FFGParams>(&q)) {
    for (const auto& g : f->layers) {
      layers.push_back({{"w_mean", matrix_to_json(g.w_mean)},
                        {"w_log_std", matrix_to_json(g.w_log_std)},
                        {"b_mean", matrix_to_json(g.b_mean)},
                        {"b_log_std", matrix_to_json(g.b_log_std)}});
    }
    out = {{"kind", "ffg"}, {"spec", to_json(f->spec)}};
  } else {
    const auto& m = std::get<MCDOParams>(q);
    for (const auto& d : m.layers) {
      layers.push_back({{"w", matrix_to_json(d.w)}, {"b", matrix_to_json(d.b)}});
    }
    out = {{"kind", "mcdo"},
           {"spec", to_json(m.spec)},
           {"p", m.p},
           {"drop_inputs", m.drop_inputs}};
  }
  out["layers"] = std::move(layers);
  return out;
}

json to_json(const NetworkParams& theta) {
  json layers = json::array();
  for (const auto& d : theta.layers) {
    layers.push_back({{"w", matrix_to_json(d.w)}, {"b", matrix_to_json(d.b)}});
  }
  return {{"kind", "point"}, {"spec", to_json(theta.spec)}, {"layers", std::move(layers)}};
}

ParamDist dist_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const NetworkSpec spec = spec_from_json(j.at("spec"));
  if (kind == "ffg") {
    FFGParams q{spec, {}};
    for (const auto& l : j.at("layers")) {
      q.layers.push_back({matrix_from_json(l.at("w_mean")), matrix_from_json(l.at("w_log_std")),
                          matrix_from_json(l.at("b_mean")),
                          matrix_from_json(l.at("b_log_std"))});
    }
    validate(q);
    return q;
  }
  if (kind == "mcdo") {
    MCDOParams q{spec, {}, j.at("p").get<double>(), j.at("drop_inputs").get<bool>()};
    for (const auto& l : j.at("layers")) {
      q.layers.push_back({matrix_from_json(l.at("w")), matrix_from_json(l.at("b"))});
    }
    validate(q);
    return q;
  }
  throw std::invalid_argument(fmt::format("unknown distribution kind '{}'", kind));
}

NetworkParams params_from_json(const json& j) {
  if (j.at("kind").get<std::string>() != "point") {
    throw std::invalid_argument("expected point parameters");
  }
  NetworkParams theta{spec_from_json(j.at("spec")), {}};
  for (const auto& l : j.at("layers")) {
    theta.layers.push_back({matrix_from_json(l.at("w")), matrix_from_json(l.at("b"))});
  }
  validate(theta);
  return theta;
}

void save_json(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  os << j.dump(2) << '\n';
}

json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  return json::parse(is);
}

}  // namespace inbetween
