#include "twolip/training.hpp"

#include "twolip/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace twolip {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kRunningMomentum = 0.9;

}  // namespace

void TrainConfig::validate() const {
  if (k < 1) throw std::invalid_argument("train: k must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("train: betas must lie in (0, 1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("train: adam_eps must be > 0");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (batch_size < 0) throw std::invalid_argument("train: batch_size must be >= 0");
  if (!(fit_eps > 0.0)) throw std::invalid_argument("train: fit_eps must be > 0");
  if (eval_every < 1) throw std::invalid_argument("train: eval_every must be >= 1");
}

MemorizationCheck memorization_check(const TwoLayerNet& net, const GenericDataset& ds,
                                     double fit_eps) {
  MemorizationCheck check;
  Eigen::VectorXd values = forward_batch(net, ds.points);
  double sq = 0.0;
  for (int i = 0; i < ds.n(); ++i) {
    double r = values[i] - ds.labels[i];
    sq += r * r;
    if (values[i] * ds.labels[i] <= 0.0) ++check.sign_errors;
  }
  check.mse = sq / ds.n();
  check.memorized = check.mse <= fit_eps && check.sign_errors == 0;
  return check;
}

void AdamState::update(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad,
                       double lr, double beta1, double beta2, double eps) {
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  double mc = 1.0 - std::pow(beta1, t);
  double vc = 1.0 - std::pow(beta2, t);
  param -= (lr / mc) * m.cwiseQuotient(((v / vc).cwiseSqrt().array() + eps).matrix());
}

BatchGradients batch_loss_gradients(const Eigen::MatrixXd& w, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b,
                                    const Eigen::VectorXd& gamma,
                                    const Eigen::VectorXd& beta,
                                    const Eigen::MatrixXd& xb, const Eigen::VectorXd& yb,
                                    NormMode mode) {
  const int bsz = static_cast<int>(xb.cols());
  const bool bn = mode == NormMode::BatchNorm;
  if (bn && bsz < 2)
    throw std::invalid_argument("batch_loss_gradients: batch normalization needs >= 2");

  BatchGradients out;
  Eigen::MatrixXd z = w * xb;  // k x bsz
  Eigen::MatrixXd xhat, u;
  Eigen::VectorXd mu, var, inv_std;
  if (bn) {
    mu = z.rowwise().mean();
    Eigen::MatrixXd centered = z.colwise() - mu;
    var = centered.array().square().rowwise().mean().matrix();
    inv_std = (var.array() + kBnEps).rsqrt().matrix();
    xhat = inv_std.asDiagonal() * centered;
    u = (gamma.asDiagonal() * xhat).colwise() + beta;
    out.batch_mean = mu;
    out.batch_var_unbiased = var * (static_cast<double>(bsz) / (bsz - 1));
  } else {
    u = z.colwise() + b;
  }
  Eigen::MatrixXd h = u.cwiseMax(0.0);
  Eigen::VectorXd f = h.transpose() * a;
  Eigen::VectorXd resid = f - yb;
  out.loss = resid.squaredNorm() / bsz;

  Eigen::VectorXd d_f = (2.0 / bsz) * resid;
  out.d_a.noalias() = h * d_f;
  Eigen::MatrixXd d_h = a * d_f.transpose();  // k x bsz
  Eigen::MatrixXd d_u = (u.array() > 0.0).select(d_h, 0.0);
  Eigen::MatrixXd d_z;
  if (bn) {
    out.d_beta = d_u.rowwise().sum();
    out.d_gamma = (d_u.array() * xhat.array()).rowwise().sum().matrix();
    // Batch-statistics backward pass, per neuron row:
    // dZ = inv_std/B .* (B dXhat - sum(dXhat) - Xhat .* sum(dXhat .* Xhat))
    Eigen::MatrixXd d_xhat = gamma.asDiagonal() * d_u;
    Eigen::VectorXd sum_dx = d_xhat.rowwise().sum();
    Eigen::VectorXd sum_dx_x = (d_xhat.array() * xhat.array()).rowwise().sum().matrix();
    d_z = (static_cast<double>(bsz) * d_xhat).colwise() - sum_dx;
    d_z -= (xhat.array().colwise() * sum_dx_x.array()).matrix();
    d_z = (inv_std / bsz).asDiagonal() * d_z;
  } else {
    out.d_b = d_u.rowwise().sum();
    d_z = d_u;
  }
  out.d_w.noalias() = d_z * xb.transpose();
  return out;
}

namespace {

struct TrainState {
  Eigen::MatrixXd w;      // k x d
  Eigen::VectorXd a;      // k
  Eigen::VectorXd b;      // k, None mode only
  Eigen::VectorXd gamma;  // k, BatchNorm mode only
  Eigen::VectorXd beta;   // k
  Eigen::VectorXd run_mean, run_var;
};

TwoLayerNet inference_net(const TrainState& st, NormMode mode) {
  TwoLayerNet net;
  net.a = st.a;
  net.activation = Activation::relu();
  if (mode == NormMode::None) {
    net.w = st.w;
    net.b = st.b;
    return net;
  }
  Eigen::VectorXd scale =
      st.gamma.cwiseQuotient((st.run_var.array() + kBnEps).sqrt().matrix());
  net.w = scale.asDiagonal() * st.w;
  net.b = st.beta - scale.cwiseProduct(st.run_mean);
  return net;
}

}  // namespace

TrainResult train(const GenericDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  const int n = ds.n();
  const int d = ds.d();
  const int k = cfg.k;
  const int batch = std::min(n, cfg.batch_size == 0 ? std::min(n, 128) : cfg.batch_size);
  const bool bn = cfg.norm_mode == NormMode::BatchNorm;
  if (bn && batch < 2)
    throw std::invalid_argument(
        "train: batch normalization needs batches of at least 2 points; "
        "use norm_mode=None for singleton batches");

  Rng rng(cfg.seed);
  TrainState st;
  st.w.resize(k, d);
  const double w_sigma = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < d; ++j) st.w(l, j) = w_sigma * rng.normal();
  st.a.resize(k);
  const double a_sigma = 1.0 / std::sqrt(static_cast<double>(k));
  for (int l = 0; l < k; ++l) st.a[l] = a_sigma * rng.normal();
  st.b = Eigen::VectorXd::Zero(k);
  st.gamma = Eigen::VectorXd::Ones(k);
  st.beta = Eigen::VectorXd::Zero(k);
  st.run_mean = Eigen::VectorXd::Zero(k);
  st.run_var = Eigen::VectorXd::Ones(k);

  AdamState opt_w(k, d), opt_a(k), opt_b(k), opt_gamma(k), opt_beta(k);

  const Eigen::MatrixXd x_all = ds.points.transpose();  // d x n
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  // Batch start offsets; a trailing singleton is merged into its
  // predecessor under BatchNorm.
  std::vector<int> starts;
  for (int s = 0; s < n; s += batch) starts.push_back(s);
  if (bn && starts.size() > 1 && n - starts.back() == 1) starts.pop_back();

  TrainResult result;
  auto pair_trace = [&] {
    std::vector<std::pair<int, double>> out;
    out.reserve(result.loss_trace.size());
    for (const auto& e : result.loss_trace) out.emplace_back(e.epoch, e.mse);
    return out;
  };

  Eigen::MatrixXd xb;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(perm);
    for (std::size_t bi = 0; bi < starts.size(); ++bi) {
      const int s = starts[bi];
      const int e = (bi + 1 < starts.size()) ? starts[bi + 1] : n;
      const int bsz = e - s;

      xb.resize(d, bsz);
      Eigen::VectorXd yb(bsz);
      for (int c = 0; c < bsz; ++c) {
        xb.col(c) = x_all.col(perm[s + c]);
        yb[c] = ds.labels[perm[s + c]];
      }

      BatchGradients g =
          batch_loss_gradients(st.w, st.a, st.b, st.gamma, st.beta, xb, yb,
                               cfg.norm_mode);
      if (!std::isfinite(g.loss)) {
        result.epochs_used = epoch;
        throw TrainingDiverged("train: non-finite loss at epoch " +
                                   std::to_string(epoch),
                               pair_trace());
      }
      if (bn) {
        st.run_mean =
            kRunningMomentum * st.run_mean + (1.0 - kRunningMomentum) * g.batch_mean;
        st.run_var = kRunningMomentum * st.run_var +
                     (1.0 - kRunningMomentum) * g.batch_var_unbiased;
      }

      opt_w.update(st.w, g.d_w, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
      opt_a.update(st.a, g.d_a, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
      if (bn) {
        opt_gamma.update(st.gamma, g.d_gamma, cfg.lr, cfg.beta1, cfg.beta2,
                         cfg.adam_eps);
        opt_beta.update(st.beta, g.d_beta, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
      } else {
        opt_b.update(st.b, g.d_b, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
      }
    }

    result.epochs_used = epoch;
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      TwoLayerNet net = inference_net(st, cfg.norm_mode);
      MemorizationCheck check = memorization_check(net, ds, cfg.fit_eps);
      result.loss_trace.push_back({epoch, check.mse, check.sign_errors});
      if (!std::isfinite(check.mse))
        throw TrainingDiverged("train: non-finite evaluation loss at epoch " +
                                   std::to_string(epoch),
                               pair_trace());
      if (check.memorized) {
        result.net = std::move(net);
        result.final_loss = check.mse;
        result.memorized = true;
        return result;
      }
    }
  }

  result.net = inference_net(st, cfg.norm_mode);
  MemorizationCheck final_check = memorization_check(result.net, ds, cfg.fit_eps);
  result.final_loss = final_check.mse;
  result.memorized = final_check.memorized;
  return result;
}

}  // namespace twolip
