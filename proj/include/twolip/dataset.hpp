#pragma once

#include "twolip/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace twolip {

/// Input distribution for data points and gradient probes.
/// Sphere: uniform on the unit sphere S^{d-1}.
/// Gaussian: N(0, I/d), so points concentrate near unit norm.
enum class DataModel { Sphere, Gaussian };

std::string to_string(DataModel model);
DataModel data_model_from_string(const std::string& name);

struct DatasetConfig {
  int n = 0;
  int d = 0;
  DataModel model = DataModel::Sphere;
  std::uint64_t seed = 0;
  /// When true, labels are a random permutation of n/2 copies of each sign
  /// (n must be even) instead of i.i.d. signs.
  bool balanced = false;

  void validate() const;
};

struct GenericDataset {
  Eigen::MatrixXd points;  // n x d, row i is x_i
  Eigen::VectorXd labels;  // entries in {-1, +1}
  DatasetConfig config;

  int n() const { return static_cast<int>(points.rows()); }
  int d() const { return static_cast<int>(points.cols()); }
};

/// Draw a dataset from the seeded stream. Draw order is fixed: all points
/// first (row by row), then all labels, so (config -> bytes) is stable.
GenericDataset generate(const DatasetConfig& config);

double min_pairwise_distance(const GenericDataset& ds);

/// Indices of a maximal balanced subset: m points of each sign where
/// m = min(#positive, #negative), keeping the first m of each in order.
std::vector<int> balanced_subset(const GenericDataset& ds);

/// Draw one probe point from the model (used by gradient probing).
Eigen::VectorXd sample_point(DataModel model, int d, Rng& rng);

}  // namespace twolip
