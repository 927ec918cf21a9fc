#pragma once

#include "twolip/dataset.hpp"
#include "twolip/network.hpp"
#include "twolip/tensor.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twolip {

/// Thrown when a certificate's preconditions fail (poor fit, rank excess,
/// or a degenerate chain); the message names the failing quantity.
class CertificateRefused : public std::runtime_error {
 public:
  explicit CertificateRefused(const std::string& what) : std::runtime_error(what) {}
};

using EvalFn = std::function<double(const Eigen::VectorXd&)>;
using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// max |grad f(z_t)| over `probes` points z_t drawn from the model. With a
/// fixed seed the probe stream is a prefix, so the value is nondecreasing
/// in `probes`. Always a lower bound on the Lipschitz constant over any set
/// containing the probes.
double max_random_gradient(const GradFn& grad_fn, int d, int probes,
                           DataModel model, std::uint64_t seed);

/// max over opposite-label pairs of |f(x_i) - f(x_j)| / |x_i - x_j|.
/// A Lipschitz lower bound on any set containing the data.
double pairwise_slope_lb(const EvalFn& eval_fn, const GenericDataset& ds);

struct LipschitzReport {
  double max_random_gradient = 0.0;
  int probe_count = 0;
  double pairwise_slope_lb = 0.0;
  std::optional<double> spectral_proxy;  // nets only
  std::uint64_t seed = 0;
};

/// Bundles the witnesses for a network. The proxy radius covers both the
/// data and the probe points, so lower bounds never exceed it.
LipschitzReport lipschitz_report(const TwoLayerNet& net, const GenericDataset& ds,
                                 int probes, std::uint64_t seed);

enum class CertificateKind { Spectral, Tensor, Quadratic, Polynomial };

std::string to_string(CertificateKind kind);

/// A computable bound together with the quantities it was assembled from,
/// so the inequality chain can be re-audited from the record alone.
struct Certificate {
  CertificateKind kind = CertificateKind::Spectral;
  double lower_bound = 0.0;
  double conjectured_floor = 0.0;
  std::vector<std::pair<std::string, double>> components;
  std::vector<std::string> notes;

  double component(const std::string& name) const;
  void add(const std::string& name, double value) { components.emplace_back(name, value); }
};

/// Certified value L * |a| * |W|_op (a Lipschitz upper bound for the net,
/// and the quantity the width-k floor sqrt(n/k) constrains for interpolating
/// nets). Components record the Cauchy-Schwarz chain
/// sum_l |a_l| |w_l| <= |a| |W|_F <= sqrt(k) |a| |W|_op, verified numerically.
/// Refused when the worst data residual exceeds fit_tol (default 0.1).
Certificate spectral_certificate(const TwoLayerNet& net, const GenericDataset& ds,
                                 double fit_tol = 0.1);

/// For an order-p interpolating tensor T: with Omega = sum_i y_i x_i^{(x) p},
/// s = <T, Omega> = sum_i y_i f(x_i) and
/// |T|_op >= s / (d^{p-1} |Omega|_op). Floor sqrt(n / d^{p-1}).
/// Refused when s <= 0.
Certificate tensor_certificate(const RankOneSum& t, const GenericDataset& ds);

/// Rank-aware sharpening for order 2: |T|_op >= <T, Omega> / (rank_k |Omega|_op),
/// using the nuclear-norm bound |T|_* <= rank(T) |T|_op. Floor sqrt(n d)/rank_k.
/// Refused when the measured numerical rank exceeds rank_k.
Certificate quadratic_certificate(const RankOneSum& t, const GenericDataset& ds,
                                  int rank_k);

/// For polynomial-activation nets: restrict to the balanced subset (which
/// cancels the constant term), split f into homogeneous parts T_1..T_p,
/// take s_q = <T_q, Omega_q>, pick q* = argmax s_q, and certify
/// |T_q*|_op / q*! >= s_q* / (d^{q*-1} |Omega_q*|_op q*!). Floor
/// sqrt(n / d^{p-1}). Refused when every s_q <= 0 or the subset is empty.
Certificate polynomial_certificate(const TwoLayerNet& net, const GenericDataset& ds,
                                   double fit_tol = 0.1);

struct RandomTensorStats {
  double opnorm = 0.0;
  double ratio = 0.0;                  // opnorm * sqrt(d^{p-1} / n)
  std::vector<double> fixed_x_values;  // |sum_i y_i (x_i . x)^p| * sqrt(d^p / n)
  std::uint64_t seed = 0;
};

/// Empirical scale of Omega = sum_i y_i x_i^{(x) p} for a random dataset:
/// its operator norm against the sqrt(n / d^{p-1}) scale, and the
/// concentration of the form at fixed random unit probes against the
/// sqrt(n / d^p) scale.
RandomTensorStats random_tensor_stats(const GenericDataset& ds, int p, int probes);

}  // namespace twolip
