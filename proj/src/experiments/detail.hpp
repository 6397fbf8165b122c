#pragma once

// Shared pieces of the experiment drivers; not part of the public API.

#include <cmath>
#include <string>
#include <vector>

#include "inbetween/experiments/output.hpp"
#include "inbetween/experiments/runs.hpp"

namespace inbetween::detail {

/// Index of the value closest to `target`.
std::size_t nearest(std::span<const double> values, double target);

/// Setup for a `depth`-layer network of the configured width.
CellSetup cell_setup(const ExperimentConfig& cfg, std::size_t input_dim, std::size_t depth,
                     const PriorConfig& prior, double noise_std, std::uint64_t seed);

/// x0..x{D-1},y rows of a dataset.
CsvTable data_table(const Dataset& d);

/// Per-point overconfidence ratios; NaN where either variance is not positive.
std::vector<double> gamma_curve(std::span<const double> gp_var, std::span<const double> q_var);

double std_of(double var);

/// <stem>.trace.csv for trained methods, <stem>.chain.csv for HMC; nothing
/// for the GP.
void write_fit_logs(RunRecorder& rec, Method m, std::size_t depth, std::uint64_t seed,
                    const Prediction& p);

}  // namespace inbetween::detail
