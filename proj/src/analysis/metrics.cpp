#include "inbetween/analysis/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace inbetween {

double overconfidence_ratio(double gp_var, double q_var) {
  if (!(gp_var > 0.0) || !(q_var > 0.0)) {
    throw std::invalid_argument(
        fmt::format("overconfidence ratio needs positive variances, got {} and {}", gp_var, q_var));
  }
  return std::sqrt(gp_var / q_var);
}

std::vector<double> overconfidence_ratios(std::span<const double> gp_var,
                                          std::span<const double> q_var) {
  if (gp_var.size() != q_var.size()) throw std::invalid_argument("variance vectors differ in size");
  std::vector<double> r(gp_var.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = overconfidence_ratio(gp_var[i], q_var[i]);
  return r;
}

}  // namespace inbetween
