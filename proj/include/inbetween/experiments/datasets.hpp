#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "inbetween/analysis/bounds.hpp"
#include "inbetween/core/dataset.hpp"
#include "inbetween/gp/nngp.hpp"

namespace inbetween {

/// Two isotropic Gaussian input clusters with targets drawn jointly from an
/// NNGP prior plus Gaussian observation noise.
struct TwoClusterConfig {
  std::size_t per_cluster = 50;
  double cluster_std = 0.1;
  double noise_std = 0.1;
  // Unset selects the depth table of default_kernel.
  std::optional<double> sigma_w;
};

/// Clusters at (1, 1) and (-1, -1); y ~ GP(0, k_depth) + N(0, noise^2) with
/// the default prior of that depth.
Dataset gen_two_cluster_2d(std::uint64_t seed, std::size_t depth = 1,
                           const TwoClusterConfig& cfg = {});
/// Same construction on the real line with clusters at -1 and +1.
Dataset gen_two_cluster_1d(std::uint64_t seed, std::size_t depth = 1,
                           const TwoClusterConfig& cfg = {.per_cluster = 20});
/// Inputs only: per_cluster rows around each centre, first cluster first.
Matrix cluster_inputs(const std::vector<std::vector<double>>& centres, std::size_t per_cluster,
                      double cluster_std, RngStream& rng);
/// One joint draw of f at the rows of x plus independent noise.
std::vector<double> gp_targets(const NngpKernelConfig& kernel, const Matrix& x,
                               double noise_std, RngStream& rng);

struct RandomClusters {
  Dataset data;
  /// x(lambda) = centre_a + lambda (centre_b - centre_a), lambda in [0, 1].
  LineProbe probe;
  std::vector<double> centre_a;
  std::vector<double> centre_b;
  NngpKernelConfig kernel;
};

struct RandomClusterConfig {
  std::size_t dim = 5;
  std::size_t depth = 1;
  std::size_t per_cluster = 50;
  double cluster_std = 0.1;
  double noise_std = 0.01;
  double sigma_w = 1.4142135623730951;
  double sigma_b = 1.0;
};

/// Centres uniform on the sphere of radius sqrt(dim).
RandomClusters gen_random_clusters(std::uint64_t seed, const RandomClusterConfig& cfg = {});

class NavalFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NavalOptions {
  std::size_t expected_rows = 11934;
  std::size_t expected_columns = 18;
  /// 0: compressor decay coefficient, 1: turbine decay coefficient.
  std::size_t target = 0;
  bool normalize = true;
};

/// Whitespace-separated rows of 16 features followed by 2 targets. Constant
/// feature columns are dropped.
Dataset load_naval(const std::filesystem::path& path, const NavalOptions& opts = {});
/// Resolution order: explicit path, then $INBETWEEN_DATA_DIR/naval/data.txt.
/// Returns an empty path when neither exists.
std::filesystem::path resolve_naval_path(const std::filesystem::path& explicit_path = {});

/// Fraction of total variance along the first principal component of the
/// column-centred inputs.
double pca_first_share(const Matrix& x);

nlohmann::json to_json(const TwoClusterConfig& cfg);
nlohmann::json to_json(const RandomClusterConfig& cfg);

}  // namespace inbetween
