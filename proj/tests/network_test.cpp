#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "twolip/network.hpp"
#include "twolip/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace twolip;

namespace {

TwoLayerNet random_net(int k, int d, const Activation& act, Rng& rng) {
  TwoLayerNet net;
  net.a = rng.normal_vector(k);
  net.w.resize(k, d);
  for (int l = 0; l < k; ++l) net.w.row(l) = rng.normal_vector(d).transpose() / std::sqrt(d);
  net.b = rng.normal_vector(k) * 0.1;
  net.activation = act;
  return net;
}

}  // namespace

TEST_CASE("forward on single relu neuron") {
  TwoLayerNet net;
  net.a = Eigen::VectorXd::Ones(1);
  net.w = Eigen::MatrixXd::Zero(1, 3);
  net.w(0, 0) = 1.0;
  net.b = Eigen::VectorXd::Zero(1);
  net.activation = Activation::relu();

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
  e1(0) = 1.0;
  CHECK(forward(net, e1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(forward(net, -e1) == 0.0);
}

TEST_CASE("forward with square activation sums coordinate squares") {
  TwoLayerNet net;
  net.a = Eigen::VectorXd::Ones(2);
  net.w = Eigen::MatrixXd::Identity(2, 4);
  net.b = Eigen::VectorXd::Zero(2);
  net.activation = Activation::power_fn(2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x(0) = 0.6;
  x(1) = 0.8;
  CHECK(forward(net, x) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("forward_batch matches forward row by row") {
  Rng rng(5);
  TwoLayerNet net = random_net(6, 4, Activation::relu(), rng);
  Eigen::MatrixXd xs(10, 4);
  for (int i = 0; i < 10; ++i) xs.row(i) = rng.normal_vector(4).transpose();
  Eigen::VectorXd out = forward_batch(net, xs);
  for (int i = 0; i < 10; ++i)
    CHECK(out(i) == doctest::Approx(forward(net, xs.row(i).transpose())).epsilon(1e-12));
}

TEST_CASE("gradient of linear net is the weighted row sum") {
  Rng rng(7);
  TwoLayerNet net = random_net(5, 3, Activation::power_fn(1), rng);
  Eigen::VectorXd expect = net.w.transpose() * net.a;
  Eigen::VectorXd g1 = gradient(net, rng.normal_vector(3));
  Eigen::VectorXd g2 = gradient(net, rng.normal_vector(3));
  CHECK((g1 - expect).norm() <= 1e-12);
  CHECK((g1 - g2).norm() <= 1e-12);
}

TEST_CASE("relu gradient vanishes when no neuron is active") {
  TwoLayerNet net;
  net.a = Eigen::VectorXd::Ones(2);
  net.w = Eigen::MatrixXd::Identity(2, 2);
  net.b = Eigen::VectorXd::Zero(2);
  net.activation = Activation::relu();
  Eigen::VectorXd x(2);
  x << -1.0, -1.0;
  CHECK(gradient(net, x).norm() == 0.0);
}

TEST_CASE("gradient matches finite differences for every activation") {
  Rng rng(42);
  const double h = 1e-6;
  std::vector<Activation> acts = {Activation::relu(), Activation::power_fn(3),
                                  Activation::poly({0.5, -1.0, 0.0, 2.0})};
  for (const Activation& act : acts) {
    for (int trial = 0; trial < 6; ++trial) {
      TwoLayerNet net = random_net(15, 20, act, rng);
      Eigen::VectorXd x;
      // resample until safely away from relu kinks
      bool ok = false;
      while (!ok) {
        x = rng.unit_vector(20);
        ok = ((net.w * x + net.b).cwiseAbs().minCoeff() > 1e-4);
      }
      Eigen::VectorXd g = gradient(net, x);
      Eigen::VectorXd fd(20);
      for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        fd(i) = (forward(net, xp) - forward(net, xm)) / (2 * h);
      }
      CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
    }
  }
}

TEST_CASE("matrix operator norm matches svd oracle") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    int r = 2 + trial % 7, c = 2 + (trial * 3) % 9;
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i) m.row(i) = rng.normal_vector(c).transpose();
    double oracle = m.jacobiSvd().singularValues()(0);
    CHECK(matrix_operator_norm(m) == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("spectral proxy closed forms") {
  TwoLayerNet net;
  net.a = Eigen::VectorXd::Constant(1, 2.0);
  net.w = Eigen::MatrixXd::Zero(1, 3);
  net.w(0, 0) = 1.0;
  net.b = Eigen::VectorXd::Zero(1);
  net.activation = Activation::relu();
  CHECK(spectral_proxy(net, 1.0) == doctest::Approx(2.0).epsilon(1e-9));

  net.activation = Activation::power_fn(2);
  // L = max |2t| over [-1,1] = 2, proxy = 2 * 2 * 1
  CHECK(spectral_proxy(net, 1.0) == doctest::Approx(4.0).epsilon(1e-9));

  CHECK_THROWS_AS(spectral_proxy(net, 0.0), std::invalid_argument);
}

TEST_CASE("spectral proxy dominates sampled gradients and slopes") {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    TwoLayerNet net = random_net(12, 8, Activation::relu(), rng);
    double proxy = spectral_proxy(net, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
      Eigen::VectorXd x = rng.unit_vector(8);
      CHECK(gradient(net, x).norm() <= proxy * (1 + 1e-9));
    }
    // two-point slope bound inside the unit ball
    for (int rep = 0; rep < 200; ++rep) {
      Eigen::VectorXd x = rng.unit_vector(8) * rng.uniform();
      Eigen::VectorXd y = rng.unit_vector(8) * rng.uniform();
      double dist = (x - y).norm();
      if (dist < 1e-12) continue;
      double slope = std::abs(forward(net, x) - forward(net, y)) / dist;
      CHECK(slope <= proxy * (1 + 1e-9));
    }
  }
}

TEST_CASE("homogeneous parts of a pure square without bias") {
  Rng rng(3);
  Eigen::VectorXd w0 = rng.normal_vector(4);
  TwoLayerNet net;
  net.a = Eigen::VectorXd::Ones(1);
  net.w = w0.transpose();
  net.b = Eigen::VectorXd::Zero(1);
  net.activation = Activation::poly({0.0, 0.0, 1.0});

  HomogeneousParts parts = extract_homogeneous(net);
  CHECK(parts.constant == 0.0);
  REQUIRE(parts.parts.size() == 2);
  CHECK(parts.parts[0].term_count() == 0);  // no linear component
  RankOneSum expect = RankOneSum::power_of(w0, 2);
  // compare as quadratic forms
  double diff = frobenius_inner(parts.parts[1], parts.parts[1]) -
                2 * frobenius_inner(parts.parts[1], expect) +
                frobenius_inner(expect, expect);
  CHECK(std::abs(diff) <= 1e-12);
}

TEST_CASE("homogeneous parts expand the bias binomially") {
  // psi(t) = t^2 at bias 1: (w.x + 1)^2 = (w.x)^2 + 2 w.x + 1
  Rng rng(4);
  Eigen::VectorXd w0 = rng.normal_vector(3);
  TwoLayerNet net;
  net.a = Eigen::VectorXd::Ones(1);
  net.w = w0.transpose();
  net.b = Eigen::VectorXd::Ones(1);
  net.activation = Activation::poly({0.0, 0.0, 1.0});

  HomogeneousParts parts = extract_homogeneous(net);
  CHECK(parts.constant == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(parts.parts.size() == 2);
  REQUIRE(parts.parts[0].term_count() == 1);
  const RankOneTerm& lin = parts.parts[0].terms()[0];
  CHECK((lin.coef * lin.vec - 2.0 * w0).norm() <= 1e-12);
}

TEST_CASE("homogeneous parts reconstruct the forward pass") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    TwoLayerNet net = random_net(4, 6, Activation::poly({0.3, -0.7, 0.2, 1.1}), rng);
    HomogeneousParts parts = extract_homogeneous(net);
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd x = rng.normal_vector(6);
      double sum = parts.constant;
      for (const RankOneSum& part : parts.parts) sum += eval_form(part, x);
      CHECK(sum == doctest::Approx(forward(net, x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("power activation nets with zero bias are tensor forms") {
  Rng rng(15);
  TwoLayerNet net = random_net(5, 4, Activation::power_fn(3), rng);
  net.b.setZero();
  RankOneSum t(3, 4);
  for (int l = 0; l < 5; ++l) t.add_term(net.a(l), net.w.row(l).transpose());
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x = rng.normal_vector(4);
    CHECK(forward(net, x) == doctest::Approx(eval_form(t, x)).epsilon(1e-12));
  }
}

TEST_CASE("activation validation") {
  CHECK_THROWS_AS(Activation::power_fn(0), std::invalid_argument);
  CHECK_THROWS_AS(Activation::poly({1.0}), std::invalid_argument);        // degree 0
  CHECK_THROWS_AS(Activation::poly({1.0, 2.0, 0.0}), std::invalid_argument);  // zero lead
  CHECK(Activation::poly({0.0, 1.0}).degree() == 1);
  CHECK(Activation::relu().degree() == -1);
}

TEST_CASE("extract_homogeneous rejects relu") {
  Rng rng(20);
  TwoLayerNet net = random_net(3, 3, Activation::relu(), rng);
  CHECK_THROWS_AS(extract_homogeneous(net), std::invalid_argument);
}
