#pragma once

#include "twolip/tensor.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace twolip {

/// Scalar activation applied coordinate-wise after the first layer.
/// ReLU: t -> max(t, 0), with derivative fixed to 0 at t = 0.
/// Power: t -> t^p for integer p >= 1.
/// Poly:  t -> sum_q coeffs[q] t^q, coeffs holds degrees 0..p.
struct Activation {
  enum class Kind { ReLU, Power, Poly };

  Kind kind = Kind::ReLU;
  int power = 0;                // Power only
  std::vector<double> coeffs;   // Poly only, index = degree

  static Activation relu();
  static Activation power_fn(int p);
  static Activation poly(std::vector<double> coeffs);

  double value(double t) const;
  double derivative(double t) const;

  /// Polynomial degree; -1 for ReLU.
  int degree() const;

  void validate() const;
};

struct TwoLayerNet {
  Eigen::VectorXd a;  // output weights, length k
  Eigen::MatrixXd w;  // first-layer weights, k x d, row l is w_l
  Eigen::VectorXd b;  // first-layer biases, length k
  Activation activation;

  int neuron_count() const { return static_cast<int>(w.rows()); }
  int input_dim() const { return static_cast<int>(w.cols()); }

  void validate() const;  // shape agreement and finiteness
};

/// f(x) = a . psi(W x + b).
double forward(const TwoLayerNet& net, const Eigen::VectorXd& x);

/// Batched forward over rows of xs (one point per row).
Eigen::VectorXd forward_batch(const TwoLayerNet& net, const Eigen::MatrixXd& xs);

/// grad f(x) = W^T (a .* psi'(W x + b)).
Eigen::VectorXd gradient(const TwoLayerNet& net, const Eigen::VectorXd& x);

/// Largest singular value by power iteration on M^T M, to relative
/// tolerance `tol` (always a lower bound on the true value).
double matrix_operator_norm(const Eigen::MatrixXd& m, int max_iters = 10000,
                            double tol = 1e-12);

/// Max |psi'| over [-r, r], by dense grid plus endpoints for polynomial
/// activations; exactly 1 for ReLU.
double activation_derivative_bound(const Activation& act, double r);

/// Global-style Lipschitz upper bound max|psi'| * |a| * |W|_op, valid on the
/// ball of radius `radius` (any radius for ReLU). The activation bound is
/// evaluated on [-r, r] with r = radius * max_l |w_l| + max_l |b_l|.
double spectral_proxy(const TwoLayerNet& net, double radius);

/// Homogeneous parts of a polynomial-activation network:
/// f(x) = constant + sum_{q=1..p} <parts[q-1], x^{(x) q}> with
/// parts[q-1] = sum_l a_l beta_q(b_l) w_l^{(x) q}, where beta_q re-centers
/// the activation coefficients around the bias via the binomial theorem.
struct HomogeneousParts {
  double constant = 0.0;
  std::vector<RankOneSum> parts;  // parts[q-1] has order q
};

HomogeneousParts extract_homogeneous(const TwoLayerNet& net);

}  // namespace twolip
