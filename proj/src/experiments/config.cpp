#include "inbetween/experiments/config.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace inbetween {

std::string_view scale_name(Scale s) {
  switch (s) {
    case Scale::kSmoke:
      return "smoke";
    case Scale::kDesk:
      return "desk";
    case Scale::kPaper:
      return "paper";
  }
  return "unknown";
}

Scale parse_scale(std::string_view name) {
  for (Scale s : {Scale::kSmoke, Scale::kDesk, Scale::kPaper}) {
    if (scale_name(s) == name) return s;
  }
  throw std::invalid_argument(fmt::format("unknown scale '{}'", name));
}

ScaleConfig scale_config(Scale s) {
  ScaleConfig c;  // desk defaults
  c.scale = s;
  if (s == Scale::kPaper) {
    c.moment_iterations = 50000;
    c.train_iterations = 100000;
    c.hmc_samples = 250000;
    c.hmc_warmup = 10000;
    c.hmc_samples_deep = 1000000;
    c.hmc_warmup_deep = 20000;
    c.hmc_keep = 10000;
    c.al_subsample = 0;
    c.al_seeds = 20;
    c.al_iterations = 20000;
    c.init_moment_iterations = 50000;
    c.init_anneal_iterations = 10000;
    c.init_final_iterations = 100000;
  } else if (s == Scale::kSmoke) {
    c.width = 25;
    c.seeds = {0, 1};
    c.moment_iterations = 500;
    c.train_iterations = 1000;
    c.hmc_samples = 2500;
    c.hmc_warmup = 500;
    c.hmc_samples_deep = 2500;
    c.hmc_warmup_deep = 500;
    c.hmc_keep = 500;
    c.al_subsample = 500;
    c.al_seeds = 2;
    c.al_iterations = 200;
    c.al_acquisitions = 10;
    c.init_moment_iterations = 500;
    c.init_anneal_iterations = 100;
    c.init_final_iterations = 1000;
    c.predictive_samples = 200;
    c.heatmap_side = 40;
  }
  return c;
}

nlohmann::json to_json(const ScaleConfig& c) {
  return {{"scale", scale_name(c.scale)},
          {"width", c.width},
          {"seeds", c.seeds},
          {"moment_iterations", c.moment_iterations},
          {"moment_samples", c.moment_samples},
          {"moment_grid", c.moment_grid},
          {"train_iterations", c.train_iterations},
          {"train_samples", c.train_samples},
          {"predictive_samples", c.predictive_samples},
          {"learning_rate", c.learning_rate},
          {"hmc_samples", c.hmc_samples},
          {"hmc_warmup", c.hmc_warmup},
          {"hmc_samples_deep", c.hmc_samples_deep},
          {"hmc_warmup_deep", c.hmc_warmup_deep},
          {"hmc_leapfrog", c.hmc_leapfrog},
          {"hmc_keep", c.hmc_keep},
          {"al_subsample", c.al_subsample},
          {"al_seeds", c.al_seeds},
          {"al_iterations", c.al_iterations},
          {"al_acquisitions", c.al_acquisitions},
          {"al_initial", c.al_initial},
          {"al_test_fraction", c.al_test_fraction},
          {"init_moment_iterations", c.init_moment_iterations},
          {"init_anneal_iterations", c.init_anneal_iterations},
          {"init_final_iterations", c.init_final_iterations},
          {"slice_points", c.slice_points},
          {"box_points", c.box_points},
          {"heatmap_side", c.heatmap_side}};
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kGp:
      return "gp";
    case Method::kMfvi:
      return "mfvi";
    case Method::kMcdo:
      return "mcdo";
    case Method::kHmc:
      return "hmc";
  }
  return "unknown";
}

std::vector<Method> all_methods() { return {Method::kGp, Method::kMfvi, Method::kMcdo, Method::kHmc}; }

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument(fmt::format("unknown method '{}'", name));
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    const std::string_view item =
        list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!item.empty()) out.push_back(parse_method(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty method list");
  return out;
}

}  // namespace inbetween
