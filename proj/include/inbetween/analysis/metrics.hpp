#pragma once

#include <span>
#include <vector>

namespace inbetween {

/// sqrt(gp_var / q_var); throws std::invalid_argument unless both are > 0.
double overconfidence_ratio(double gp_var, double q_var);
std::vector<double> overconfidence_ratios(std::span<const double> gp_var,
                                          std::span<const double> q_var);

}  // namespace inbetween
