#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "twolip/constructors.hpp"
#include "twolip/dataset.hpp"
#include "twolip/errors.hpp"
#include "twolip/network.hpp"
#include "twolip/rng.hpp"
#include "twolip/training.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

using namespace twolip;

namespace {

GenericDataset sphere_data(int n, int d, std::uint64_t seed) {
  DatasetConfig cfg;
  cfg.n = n;
  cfg.d = d;
  cfg.model = DataModel::Sphere;
  cfg.seed = seed;
  return generate(cfg);
}

GenericDataset gaussian_data(int n, int d, std::uint64_t seed) {
  DatasetConfig cfg;
  cfg.n = n;
  cfg.d = d;
  cfg.model = DataModel::Gaussian;
  cfg.seed = seed;
  return generate(cfg);
}

TwoLayerNet zero_net(int k, int d) {
  TwoLayerNet net;
  net.w = Eigen::MatrixXd::Zero(k, d);
  net.b = Eigen::VectorXd::Zero(k);
  net.a = Eigen::VectorXd::Zero(k);
  net.activation = Activation::relu();
  return net;
}

// Loss of the training graph alone, for finite-difference probing.
double graph_loss(const Eigen::MatrixXd& w, const Eigen::VectorXd& a,
                  const Eigen::VectorXd& b, const Eigen::VectorXd& gamma,
                  const Eigen::VectorXd& beta, const Eigen::MatrixXd& xb,
                  const Eigen::VectorXd& yb, NormMode mode) {
  return batch_loss_gradients(w, a, b, gamma, beta, xb, yb, mode).loss;
}

}  // namespace

TEST_CASE("memorization check accepts an exact interpolant") {
  auto ds = sphere_data(20, 60, 11);
  auto report = cap_network(ds);
  REQUIRE(report.exact_fit);
  const auto& net = std::get<TwoLayerNet>(report.model);
  auto check = memorization_check(net, ds, 1e-8);
  CHECK(check.memorized);
  CHECK(check.mse <= 1e-16);
  CHECK(check.sign_errors == 0);
}

TEST_CASE("memorization check scores the zero function as all wrong") {
  auto ds = sphere_data(17, 30, 3);
  auto check = memorization_check(zero_net(4, 30), ds, 0.5);
  CHECK_FALSE(check.memorized);
  CHECK(check.mse == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(check.sign_errors == 17);
}

TEST_CASE("memorization check passes a cap network at any tolerance above the residual") {
  auto ds = sphere_data(40, 120, 5);
  auto report = cap_network(ds);
  REQUIRE(report.exact_fit);
  const auto& net = std::get<TwoLayerNet>(report.model);
  for (double eps : {1e-8, 1e-4, 0.02}) {
    auto check = memorization_check(net, ds, eps);
    CHECK(check.memorized);
  }
}

TEST_CASE("adam step with zero gradient leaves fresh parameters unchanged") {
  Eigen::MatrixXd param(3, 2);
  param << 1.5, -0.25, 0.0, 2.0, -3.5, 0.125;
  Eigen::MatrixXd before = param;
  AdamState opt(3, 2);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 2);
  for (int t = 0; t < 4; ++t) opt.update(param, zero, 1e-3, 0.9, 0.999, 1e-8);
  CHECK((param - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam step size is bounded by the learning rate once moments agree") {
  // After bias correction the first step is lr * g / (|g| + eps): close to lr
  // in magnitude regardless of the gradient scale.
  for (double g : {1e-6, 1.0, 1e6}) {
    Eigen::MatrixXd param = Eigen::MatrixXd::Zero(1, 1);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Constant(1, 1, g);
    AdamState opt(1, 1);
    opt.update(param, grad, 1e-3, 0.9, 0.999, 1e-8);
    const double expected = -1e-3 * g / (g + 1e-8);
    CHECK(param(0, 0) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(param(0, 0)) <= 1e-3 * (1.0 + 1e-9));
  }
}

TEST_CASE("batch gradients match central finite differences in both modes") {
  const int n = 8, d = 5, k = 4;
  auto ds = sphere_data(n, d, 21);
  Eigen::MatrixXd xb = ds.points.transpose();
  Eigen::VectorXd yb = ds.labels;

  Rng rng(314);
  Eigen::MatrixXd w(k, d);
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < d; ++j) w(l, j) = rng.normal();
  Eigen::VectorXd a(k), b(k), gamma(k), beta(k);
  for (int l = 0; l < k; ++l) a[l] = rng.normal();
  for (int l = 0; l < k; ++l) b[l] = 0.3 * rng.normal();
  for (int l = 0; l < k; ++l) gamma[l] = 1.0 + 0.2 * rng.normal();
  for (int l = 0; l < k; ++l) beta[l] = 0.3 * rng.normal();

  const double h = 1e-6;
  const double tol = 1e-4;
  auto check_block = [&](NormMode mode, Eigen::Ref<Eigen::MatrixXd> block,
                         const Eigen::MatrixXd& analytic) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        const double keep = block(r, c);
        block(r, c) = keep + h;
        double up = graph_loss(w, a, b, gamma, beta, xb, yb, mode);
        block(r, c) = keep - h;
        double dn = graph_loss(w, a, b, gamma, beta, xb, yb, mode);
        block(r, c) = keep;
        const double fd = (up - dn) / (2 * h);
        CHECK(std::abs(fd - analytic(r, c)) <= tol * (1.0 + std::abs(analytic(r, c))));
      }
    }
  };

  for (NormMode mode : {NormMode::None, NormMode::BatchNorm}) {
    // Keep every pre-activation away from the relu kink so the finite
    // differences probe a smooth region.
    Eigen::MatrixXd u;
    if (mode == NormMode::None) {
      u = (w * xb).colwise() + b;
    } else {
      Eigen::MatrixXd z = w * xb;
      Eigen::VectorXd mu = z.rowwise().mean();
      Eigen::MatrixXd centered = z.colwise() - mu;
      Eigen::VectorXd var = centered.array().square().rowwise().mean().matrix();
      Eigen::VectorXd inv_std = (var.array() + 1e-5).rsqrt().matrix();
      u = (gamma.asDiagonal() * (inv_std.asDiagonal() * centered)).colwise() + beta;
    }
    REQUIRE(u.cwiseAbs().minCoeff() > 1e-2);

    auto g = batch_loss_gradients(w, a, b, gamma, beta, xb, yb, mode);
    check_block(mode, w, g.d_w);
    check_block(mode, a, g.d_a);
    if (mode == NormMode::None) {
      check_block(mode, b, g.d_b);
    } else {
      check_block(mode, gamma, g.d_gamma);
      check_block(mode, beta, g.d_beta);
    }
  }
}

TEST_CASE("batch gradients report the batch statistics used for running averages") {
  const int n = 10, d = 4, k = 3;
  auto ds = sphere_data(n, d, 8);
  Eigen::MatrixXd xb = ds.points.transpose();
  Rng rng(99);
  Eigen::MatrixXd w(k, d);
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < d; ++j) w(l, j) = rng.normal();
  Eigen::VectorXd a = Eigen::VectorXd::Ones(k);
  auto g = batch_loss_gradients(w, a, Eigen::VectorXd::Zero(k),
                                Eigen::VectorXd::Ones(k), Eigen::VectorXd::Zero(k), xb,
                                ds.labels, NormMode::BatchNorm);
  Eigen::MatrixXd z = w * xb;
  Eigen::VectorXd mu = z.rowwise().mean();
  CHECK((g.batch_mean - mu).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::MatrixXd centered = z.colwise() - mu;
  Eigen::VectorXd var_unbiased =
      centered.array().square().rowwise().sum().matrix() / (n - 1);
  CHECK((g.batch_var_unbiased - var_unbiased).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("batch gradients refuse a singleton batch under batch statistics") {
  Eigen::MatrixXd xb = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd yb = Eigen::VectorXd::Ones(1);
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(2, 3);
  Eigen::VectorXd v2 = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(batch_loss_gradients(w, v2, v2, v2, v2, xb, yb, NormMode::BatchNorm),
                  std::invalid_argument);
  CHECK_NOTHROW(batch_loss_gradients(w, v2, v2, v2, v2, xb, yb, NormMode::None));
}

TEST_CASE("normalization statistics fold into the returned weights") {
  // A learning rate so small that every Adam step vanishes in double
  // precision freezes the parameters at their seeded initialization, so the
  // state after one full-batch epoch is known exactly: only the running
  // statistics move. The returned net must then match the fold of those
  // statistics into the frozen weights.
  const int n = 12, d = 6, k = 5;
  auto ds = sphere_data(n, d, 77);
  TrainConfig cfg;
  cfg.k = k;
  cfg.lr = 1e-300;
  cfg.epochs = 1;
  cfg.seed = 42;
  cfg.norm_mode = NormMode::BatchNorm;
  cfg.fit_eps = 1e-12;
  auto res = train(ds, cfg);

  Rng rng(cfg.seed);
  Eigen::MatrixXd w0(k, d);
  const double ws = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < d; ++j) w0(l, j) = ws * rng.normal();
  Eigen::VectorXd a0(k);
  const double as = 1.0 / std::sqrt(static_cast<double>(k));
  for (int l = 0; l < k; ++l) a0[l] = as * rng.normal();

  auto g = batch_loss_gradients(w0, a0, Eigen::VectorXd::Zero(k),
                                Eigen::VectorXd::Ones(k), Eigen::VectorXd::Zero(k),
                                ds.points.transpose(), ds.labels, NormMode::BatchNorm);
  Eigen::VectorXd rm = 0.1 * g.batch_mean;
  Eigen::VectorXd rv = 0.9 * Eigen::VectorXd::Ones(k) + 0.1 * g.batch_var_unbiased;
  Eigen::VectorXd scale = (rv.array() + 1e-5).rsqrt().matrix();

  CHECK((res.net.w - scale.asDiagonal() * w0).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((res.net.b + scale.cwiseProduct(rm)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((res.net.a - a0).cwiseAbs().maxCoeff() <= 1e-12);

  // The folded net must agree with explicit inference-mode evaluation
  // (normalize by the running statistics, then gain/shift) everywhere.
  Rng probe(999);
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd x = probe.unit_vector(d);
    Eigen::VectorXd u = ((w0 * x - rm).array() * scale.array()).matrix();
    CHECK(std::abs(forward(res.net, x) - a0.dot(u.cwiseMax(0.0))) <= 1e-6);
  }
}

TEST_CASE("reported final loss is exactly the recheck of the returned net") {
  for (NormMode mode : {NormMode::BatchNorm, NormMode::None}) {
    auto ds = sphere_data(30, 10, 13);
    TrainConfig cfg;
    cfg.k = 20;
    cfg.epochs = 40;
    cfg.seed = 7;
    cfg.norm_mode = mode;
    cfg.fit_eps = 1e-9;  // out of reach, exercises the exhausted path
    auto res = train(ds, cfg);
    auto check = memorization_check(res.net, ds, cfg.fit_eps);
    CHECK(res.final_loss == check.mse);
    CHECK(res.memorized == check.memorized);
  }
}

TEST_CASE("full batch training at a small learning rate never backslides") {
  // Stability gate: with lr = 1e-4 and full batches, the sampled loss curve
  // is non-increasing across every 50-epoch window. Plain mode only: under
  // batch statistics the early trace also reflects the running-average
  // transient, not just the optimizer.
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto ds = sphere_data(8, 5, 100 + seed);
    TrainConfig cfg;
    cfg.k = 4;
    cfg.lr = 1e-4;
    cfg.epochs = 400;
    cfg.seed = seed;
    cfg.norm_mode = NormMode::None;
    cfg.fit_eps = 1e-9;
    auto res = train(ds, cfg);
    REQUIRE(res.loss_trace.size() == 400);
    for (std::size_t i = 0; i + 50 < res.loss_trace.size(); ++i)
      CHECK(res.loss_trace[i + 50].mse <= res.loss_trace[i].mse + 1e-12);
  }
}

TEST_CASE("identical data and config reproduce the training run bit for bit") {
  auto ds = sphere_data(30, 10, 55);
  TrainConfig cfg;
  cfg.k = 24;
  cfg.epochs = 30;
  cfg.seed = 9;
  cfg.batch_size = 8;
  auto r1 = train(ds, cfg);
  auto r2 = train(ds, cfg);
  CHECK(r1.final_loss == r2.final_loss);
  CHECK(r1.epochs_used == r2.epochs_used);
  CHECK(r1.memorized == r2.memorized);
  CHECK((r1.net.w - r2.net.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r1.net.b - r2.net.b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r1.net.a - r2.net.a).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(r1.loss_trace.size() == r2.loss_trace.size());
  for (std::size_t i = 0; i < r1.loss_trace.size(); ++i)
    CHECK(r1.loss_trace[i].mse == r2.loss_trace[i].mse);

  cfg.seed = 10;
  auto r3 = train(ds, cfg);
  CHECK((r1.net.w - r3.net.w).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("batch statistics mode refuses singleton batches") {
  auto ds = sphere_data(5, 4, 2);
  TrainConfig cfg;
  cfg.k = 3;
  cfg.epochs = 2;
  cfg.batch_size = 1;
  CHECK_THROWS_AS(train(ds, cfg), std::invalid_argument);

  auto single = sphere_data(1, 4, 2);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(single, cfg), std::invalid_argument);

  // A trailing batch of one is merged, not rejected: n=5 with batch 2.
  cfg.batch_size = 2;
  CHECK_NOTHROW(train(ds, cfg));
}

TEST_CASE("a single point trains to its label without batch statistics") {
  int memorized = 0;
  for (std::uint64_t s = 1; s <= 30; ++s) {
    auto ds = gaussian_data(1, 2, 500 + s);
    TrainConfig cfg;
    cfg.k = 16;
    cfg.epochs = 2000;
    cfg.seed = s;
    cfg.norm_mode = NormMode::None;
    auto res = train(ds, cfg);
    memorized += res.memorized ? 1 : 0;
  }
  CHECK(memorized == 30);
}

TEST_CASE("trace sampling follows the evaluation cadence") {
  auto ds = sphere_data(12, 6, 31);
  TrainConfig cfg;
  cfg.k = 4;
  cfg.epochs = 20;
  cfg.eval_every = 7;
  cfg.seed = 1;
  cfg.fit_eps = 1e-12;
  auto res = train(ds, cfg);
  REQUIRE(res.loss_trace.size() == 3);
  CHECK(res.loss_trace[0].epoch == 7);
  CHECK(res.loss_trace[1].epoch == 14);
  CHECK(res.loss_trace[2].epoch == 20);  // final epoch always sampled
  CHECK(res.epochs_used == 20);
  CHECK_FALSE(res.memorized);
}

TEST_CASE("training stops at the first scheduled check that finds memorization") {
  auto ds = sphere_data(200, 50, 901);
  TrainConfig cfg;
  cfg.k = 400;
  cfg.epochs = 2000;
  cfg.eval_every = 5;
  cfg.seed = 1;
  auto res = train(ds, cfg);
  REQUIRE(res.memorized);
  CHECK(res.epochs_used < 2000);
  CHECK(res.epochs_used % 5 == 0);
  CHECK(res.loss_trace.back().epoch == res.epochs_used);
  CHECK(res.loss_trace.back().mse == res.final_loss);
  auto check = memorization_check(res.net, ds, cfg.fit_eps);
  CHECK(check.memorized);
  CHECK(check.mse <= cfg.fit_eps);
  CHECK(check.sign_errors == 0);
}

TEST_CASE("overparameterized networks memorize random labels") {
  int memorized = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto ds = sphere_data(200, 50, 900 + s);
    TrainConfig cfg;
    cfg.k = 400;
    cfg.epochs = 2000;
    cfg.eval_every = 5;
    cfg.seed = s;
    auto res = train(ds, cfg);
    memorized += res.memorized ? 1 : 0;
  }
  CHECK(memorized == 5);
}

TEST_CASE("an explosive learning rate raises a divergence error") {
  auto ds = sphere_data(10, 5, 17);
  TrainConfig cfg;
  cfg.k = 8;
  cfg.lr = 1e150;
  cfg.epochs = 5;
  cfg.norm_mode = NormMode::None;
  cfg.seed = 3;
  CHECK_THROWS_AS(train(ds, cfg), TrainingDiverged);
  try {
    train(ds, cfg);
  } catch (const TrainingDiverged& e) {
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}

TEST_CASE("config validation rejects out-of-range settings") {
  auto ds = sphere_data(6, 4, 1);
  auto expect_reject = [&](auto tweak) {
    TrainConfig cfg;
    cfg.k = 2;
    cfg.epochs = 1;
    tweak(cfg);
    CHECK_THROWS_AS(train(ds, cfg), std::invalid_argument);
  };
  expect_reject([](TrainConfig& c) { c.k = 0; });
  expect_reject([](TrainConfig& c) { c.lr = 0.0; });
  expect_reject([](TrainConfig& c) { c.epochs = 0; });
  expect_reject([](TrainConfig& c) { c.batch_size = -1; });
  expect_reject([](TrainConfig& c) { c.fit_eps = 0.0; });
  expect_reject([](TrainConfig& c) { c.eval_every = 0; });
  expect_reject([](TrainConfig& c) { c.beta1 = 1.0; });
  expect_reject([](TrainConfig& c) { c.beta2 = 0.0; });
  expect_reject([](TrainConfig& c) { c.adam_eps = 0.0; });
}
