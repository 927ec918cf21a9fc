#pragma once

#include "twolip/dataset.hpp"
#include "twolip/errors.hpp"
#include "twolip/network.hpp"
#include "twolip/tensor.hpp"

#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace twolip {

/// Residual threshold below which an interpolation counts as exact.
inline constexpr double kExactFitTol = 1e-8;

struct ConstructionDiagnostics {
  int retries_used = 0;
  double weight_norm = 0.0;                        // min-norm |w|
  std::vector<std::pair<int, int>> cap_overlaps;   // pairs with x_i.x_j > threshold
  std::vector<int> group_sizes;
  std::vector<double> group_norms;                 // |w_G| per group
  std::vector<double> group_margins;               // max_{i not in G} |w_G.x_i|
};

/// Outcome of a construction: the model, exactness of the fit measured by a
/// true forward pass over the training set, and per-construction validation.
struct ConstructionReport {
  std::variant<TwoLayerNet, RankOneSum> model;
  std::optional<TwoLayerNet> neuron_form;  // tensor construction, decompose=true
  bool exact_fit = false;
  double max_residual = 0.0;
  ConstructionDiagnostics validation;

  double eval(const Eigen::VectorXd& x) const;
  Eigen::VectorXd eval_gradient(const Eigen::VectorXd& x) const;
};

/// Minimum-norm linear interpolation w = X^T (X X^T)^{-1} y, wrapped as a
/// single Power(1) neuron. Needs n <= d and independent rows.
ConstructionReport min_norm_linear(const GenericDataset& ds);

/// One spherical-cap neuron per point: f(x) = sum_i scale * y_i *
/// relu(x_i.x - threshold). Requires scale * (1 - threshold) = 1 so each
/// point reproduces its own label; exactness then needs disjoint caps,
/// which the report records as overlap pairs.
ConstructionReport cap_network(const GenericDataset& ds, double threshold = 0.9,
                               double scale = 10.0);

/// Grouped caps: each label class is chunked into groups of size at most
/// m = ceil(n/k); per group the min-norm w_G with w_G.x_i = 1 on the group
/// becomes the neuron 2 xi_G relu(w_G.x - 1/2). A partition is accepted only
/// if every group clears the margin max_{i not in G} |w_G.x_i| < 1/2;
/// otherwise the partition is reshuffled, up to `retries` attempts, with
/// shuffles drawn deterministically from the dataset seed. Requires
/// m <= d/4. Throws ConstructionError when no attempt clears the margin.
ConstructionReport grouped_cap_network(const GenericDataset& ds, int k,
                                       int retries = 20);

/// Tensor interpolation T = sum_i y_i x_i^{(x) p} for even p. The fit is
/// approximate by design; max_residual records the worst cross-term. With
/// decompose=true the dense form is rebuilt, decomposed into at most
/// 2^p d^{p-1} rank-one terms, and wrapped as a Power(p) network.
ConstructionReport tensor_network(const GenericDataset& ds, int p,
                                  bool decompose = false);

}  // namespace twolip
