#pragma once

#include "twolip/dataset.hpp"
#include "twolip/errors.hpp"
#include "twolip/network.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace twolip {

enum class NormMode { BatchNorm, None };

struct TrainConfig {
  int k = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 10000;
  int batch_size = 0;  // 0 means min(n, 128)
  std::uint64_t seed = 0;
  NormMode norm_mode = NormMode::BatchNorm;
  double fit_eps = 0.02;
  /// Memorization is checked (and the trace sampled) every this many epochs.
  int eval_every = 1;

  void validate() const;
};

struct TraceEntry {
  int epoch = 0;       // 1-based epoch index at which the check ran
  double mse = 0.0;    // inference-mode mean squared error on the full set
  int sign_errors = 0;
};

struct TrainResult {
  TwoLayerNet net;  // inference form: normalization statistics folded in
  double final_loss = 0.0;
  bool memorized = false;
  int epochs_used = 0;
  std::vector<TraceEntry> loss_trace;
};

struct MemorizationCheck {
  bool memorized = false;
  double mse = 0.0;
  int sign_errors = 0;
};

/// mse = (1/n) sum (f(x_i) - y_i)^2; memorized needs mse <= fit_eps and a
/// correct sign on every point (f(x_i) = 0 counts as an error).
MemorizationCheck memorization_check(const TwoLayerNet& net, const GenericDataset& ds,
                                     double fit_eps);

/// Adam moment state for one parameter block; `update` applies one
/// bias-corrected step in place. A zero gradient from a fresh state leaves
/// the parameters unchanged.
struct AdamState {
  Eigen::MatrixXd m, v;
  int t = 0;

  explicit AdamState(Eigen::Index rows, Eigen::Index cols = 1)
      : m(Eigen::MatrixXd::Zero(rows, cols)), v(Eigen::MatrixXd::Zero(rows, cols)) {}

  void update(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad,
              double lr, double beta1, double beta2, double eps);
};

/// One batch of the training graph x -> Wx -> normalize -> relu -> a h:
/// the mean squared error over the batch and its exact gradients for every
/// parameter block. Pure in its inputs; running statistics are reported
/// (BatchNorm mode) but not owned here. `xb` holds one point per column.
struct BatchGradients {
  double loss = 0.0;
  Eigen::MatrixXd d_w;
  Eigen::VectorXd d_a;
  Eigen::VectorXd d_b;      // None mode
  Eigen::VectorXd d_gamma;  // BatchNorm mode
  Eigen::VectorXd d_beta;   // BatchNorm mode
  Eigen::VectorXd batch_mean, batch_var_unbiased;  // BatchNorm mode
};

BatchGradients batch_loss_gradients(const Eigen::MatrixXd& w, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b,
                                    const Eigen::VectorXd& gamma,
                                    const Eigen::VectorXd& beta,
                                    const Eigen::MatrixXd& xb, const Eigen::VectorXd& yb,
                                    NormMode mode);

/// Minimize mean squared error over the dataset with mini-batch Adam on the
/// architecture x -> Wx -> normalize -> relu -> a^T. Normalization is
/// per-neuron batch statistics with learnable gain/shift and running
/// statistics (momentum 0.9) that are folded into (W, b) for the returned
/// net. Batches are reshuffled every epoch from the seeded stream; training
/// stops early once a scheduled check finds the labels memorized.
///
/// BatchNorm mode requires batches of at least 2 points (a singleton batch
/// normalizes to zero and kills every gradient); a trailing batch of 1 is
/// merged into the previous batch. Throws TrainingDiverged if the loss
/// leaves the finite range.
TrainResult train(const GenericDataset& ds, const TrainConfig& cfg);

}  // namespace twolip
