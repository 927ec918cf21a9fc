#include "twolip/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace twolip {

std::string to_string(DataModel model) {
  switch (model) {
    case DataModel::Sphere: return "sphere";
    case DataModel::Gaussian: return "gaussian";
  }
  throw std::logic_error("unknown data model");
}

DataModel data_model_from_string(const std::string& name) {
  if (name == "sphere") return DataModel::Sphere;
  if (name == "gaussian") return DataModel::Gaussian;
  throw std::invalid_argument("unknown data model: " + name);
}

void DatasetConfig::validate() const {
  if (n <= 0) throw std::invalid_argument("dataset: n must be positive");
  if (d <= 0) throw std::invalid_argument("dataset: d must be positive");
  if (balanced && n % 2 != 0)
    throw std::invalid_argument("dataset: balanced labels need even n");
}

Eigen::VectorXd sample_point(DataModel model, int d, Rng& rng) {
  if (model == DataModel::Sphere) return rng.unit_vector(d);
  return rng.normal_vector(d) / std::sqrt(static_cast<double>(d));
}

GenericDataset generate(const DatasetConfig& config) {
  config.validate();
  Rng rng(config.seed);
  GenericDataset ds;
  ds.config = config;
  ds.points.resize(config.n, config.d);
  for (int i = 0; i < config.n; ++i)
    ds.points.row(i) = sample_point(config.model, config.d, rng).transpose();
  ds.labels.resize(config.n);
  if (config.balanced) {
    std::vector<double> signs(static_cast<std::size_t>(config.n));
    for (int i = 0; i < config.n; ++i) signs[i] = (i < config.n / 2) ? 1.0 : -1.0;
    rng.shuffle(signs);
    for (int i = 0; i < config.n; ++i) ds.labels[i] = signs[i];
  } else {
    for (int i = 0; i < config.n; ++i) ds.labels[i] = rng.sign();
  }
  return ds;
}

double min_pairwise_distance(const GenericDataset& ds) {
  const int n = ds.n();
  if (n < 2) throw std::domain_error("min_pairwise_distance: needs n >= 2");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      best = std::min(best, (ds.points.row(i) - ds.points.row(j)).norm());
  return best;
}

std::vector<int> balanced_subset(const GenericDataset& ds) {
  std::vector<int> pos, neg;
  for (int i = 0; i < ds.n(); ++i)
    (ds.labels[i] > 0 ? pos : neg).push_back(i);
  // Keep the lowest-index m points of each sign (m = minority count).
  std::size_t m = std::min(pos.size(), neg.size());
  std::vector<int> out;
  out.reserve(2 * m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(pos[i]);
  for (std::size_t i = 0; i < m; ++i) out.push_back(neg[i]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace twolip
