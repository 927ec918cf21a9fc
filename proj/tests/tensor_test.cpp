#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "twolip/rng.hpp"
#include "twolip/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace twolip;

namespace {

Eigen::VectorXd basis(int d, int i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  e(i) = 1.0;
  return e;
}

RankOneSum random_sum(int order, int dim, int terms, Rng& rng) {
  RankOneSum t(order, dim);
  for (int i = 0; i < terms; ++i) t.add_term(rng.normal(), rng.normal_vector(dim));
  return t;
}

// Dense contraction oracle evaluated without RankOneSum code paths.
double dense_eval(const DenseTensor& dense, const Eigen::VectorXd& x) {
  return dense.contract(x);
}

}  // namespace

TEST_CASE("eval_form basics") {
  RankOneSum t = RankOneSum::power_of(basis(3, 0), 2);
  CHECK(eval_form(t, basis(3, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_form(t, basis(3, 1)) == doctest::Approx(0.0).epsilon(1e-15));
  Eigen::VectorXd bad(2);
  bad << 1, 2;
  CHECK_THROWS_AS(eval_form(t, bad), std::domain_error);
}

TEST_CASE("eval_form matches dense contraction") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    RankOneSum t = random_sum(3, 4, 5, rng);
    DenseTensor dense = DenseTensor::from_rank_one_sum(t);
    for (int rep = 0; rep < 4; ++rep) {
      Eigen::VectorXd x = rng.normal_vector(4);
      CHECK(eval_form(t, x) == doctest::Approx(dense_eval(dense, x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("form_gradient closed forms") {
  // order 1: gradient is the constant sum of vectors
  Rng rng(3);
  RankOneSum lin = random_sum(1, 5, 3, rng);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(5);
  for (const auto& term : lin.terms()) expect += term.coef * term.vec;
  Eigen::VectorXd g1 = form_gradient(lin, rng.normal_vector(5));
  Eigen::VectorXd g2 = form_gradient(lin, rng.normal_vector(5));
  CHECK((g1 - expect).norm() <= 1e-12);
  CHECK((g1 - g2).norm() <= 1e-12);

  // order 2 at an orthogonal point
  RankOneSum t = RankOneSum::power_of(basis(3, 0), 2);
  CHECK(form_gradient(t, basis(3, 1)).norm() == 0.0);
}

TEST_CASE("form_gradient matches finite differences") {
  Rng rng(55);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    int p = 2 + trial % 3;
    RankOneSum t = random_sum(p, 4, 4, rng);
    Eigen::VectorXd x = rng.normal_vector(4);
    Eigen::VectorXd g = form_gradient(t, x);
    Eigen::VectorXd fd(4);
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (eval_form(t, xp) - eval_form(t, xm)) / (2 * h);
    }
    CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("frobenius inner product basics") {
  for (int p : {1, 2, 3, 4}) {
    RankOneSum a = RankOneSum::power_of(basis(3, 0), p);
    RankOneSum b = RankOneSum::power_of(basis(3, 1), p);
    CHECK(frobenius_inner(a, b) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(frobenius_inner(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(frobenius_norm(a) == doctest::Approx(1.0).epsilon(1e-15));
  }
  Eigen::VectorXd v(4);
  v << 0.5, 0.5, 0.5, 0.5;  // unit norm
  RankOneSum a = RankOneSum::power_of(v, 3);
  CHECK(frobenius_inner(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frobenius inner matches dense entrywise sum") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    RankOneSum a = random_sum(3, 4, 4, rng);
    RankOneSum b = random_sum(3, 4, 3, rng);
    DenseTensor da = DenseTensor::from_rank_one_sum(a);
    DenseTensor db = DenseTensor::from_rank_one_sum(b);
    double dense = 0;
    for (std::size_t i = 0; i < da.entry_count(); ++i)
      dense += da.entries()[i] * db.entries()[i];
    CHECK(frobenius_inner(a, b) == doctest::Approx(dense).epsilon(1e-10));
  }
  RankOneSum o2(2, 4), o3(3, 4);
  CHECK_THROWS_AS(frobenius_inner(o2, o3), std::domain_error);
}

TEST_CASE("operator norm of a single unit power is one") {
  Rng rng(6);
  for (int p : {1, 2, 3, 4}) {
    Eigen::VectorXd x0 = rng.unit_vector(5);
    RankOneSum t = RankOneSum::power_of(x0, p);
    auto res = operator_norm(t);
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(std::abs(res.witness.dot(x0)) - 1.0) <= 1e-6);
    CHECK(std::abs(res.witness.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("operator norm matches eigendecomposition for matrices") {
  Rng rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    int d = 5 + trial % 26;
    RankOneSum t = random_sum(2, d, 6, rng);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (const auto& term : t.terms()) m += term.coef * term.vec * term.vec.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    double oracle = es.eigenvalues().cwiseAbs().maxCoeff();
    auto res = operator_norm(t);
    CHECK(res.value == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("operator norm of diagonal quartic picks the top coefficient") {
  RankOneSum t(4, 3);
  t.add_term(3.0, basis(3, 0));
  t.add_term(1.0, basis(3, 1));
  t.add_term(1.0, basis(3, 2));
  auto res = operator_norm(t);
  CHECK(res.value == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(std::abs(std::abs(res.witness(0)) - 1.0) <= 1e-6);
}

TEST_CASE("operator norm handles negative coefficients via both signs") {
  // sup |g| with g(x) = -2 x1^4 + x2^4 is 2, attained where g is negative
  RankOneSum t(4, 2);
  t.add_term(-2.0, basis(2, 0));
  t.add_term(1.0, basis(2, 1));
  auto res = operator_norm(t);
  CHECK(res.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("operator norm is nondecreasing in restarts") {
  Rng rng(91);
  for (int trial = 0; trial < 10; ++trial) {
    RankOneSum t = random_sum(3, 6, 8, rng);
    double prev = 0.0;
    for (int restarts : {1, 2, 4, 8, 16}) {
      auto res = operator_norm(t, restarts);
      CHECK(res.value >= prev - 1e-15);
      prev = res.value;
    }
  }
}

TEST_CASE("operator norm flags the zero tensor") {
  RankOneSum z(3, 4);
  auto res = operator_norm(z);
  CHECK(res.degenerate);
  CHECK(res.value == 0.0);
  CHECK(std::abs(res.witness.norm() - 1.0) <= 1e-12);
}

TEST_CASE("norm chain between operator and frobenius norms") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    int p = 2 + trial % 3;
    int d = 4;
    RankOneSum t = random_sum(p, d, 5, rng);
    double fro = frobenius_norm(t);
    double op = operator_norm(t, 24, 2000, 1e-12).value;
    CHECK(op <= fro * (1 + 1e-9));
    CHECK(op >= std::pow(static_cast<double>(d), -(p - 1) / 2.0) * fro * (1 - 1e-6));
  }
}

TEST_CASE("gradient norm bounded by p times operator norm on the sphere") {
  Rng rng(111);
  for (int trial = 0; trial < 10; ++trial) {
    int p = 2 + trial % 3;
    RankOneSum t = random_sum(p, 5, 6, rng);
    double op = operator_norm(t, 32, 4000, 1e-13).value;
    for (int rep = 0; rep < 50; ++rep) {
      Eigen::VectorXd x = rng.unit_vector(5);
      CHECK(form_gradient(t, x).norm() <= p * op * (1 + 1e-6));
    }
  }
}

TEST_CASE("polarize_product identity cases") {
  Rng rng(17);
  // p = 1: single term, evaluates to w.x
  Eigen::VectorXd w = rng.normal_vector(4);
  RankOneSum p1 = polarize_product({w});
  CHECK(p1.term_count() == 2);  // 2^1 signed terms
  Eigen::VectorXd x = rng.normal_vector(4);
  CHECK(eval_form(p1, x) == doctest::Approx(w.dot(x)).epsilon(1e-12));

  // p = 2 with equal factors reproduces the square
  RankOneSum p2 = polarize_product({w, w});
  CHECK(p2.term_count() == 4);
  CHECK(eval_form(p2, x) == doctest::Approx(w.dot(x) * w.dot(x)).epsilon(1e-12));

  CHECK_THROWS_AS(polarize_product({}), std::domain_error);
}

TEST_CASE("polarize_product matches direct products") {
  Rng rng(19);
  std::vector<Eigen::VectorXd> ws;
  for (int q = 0; q < 3; ++q) ws.push_back(rng.normal_vector(4));
  RankOneSum t = polarize_product(ws);
  CHECK(t.term_count() == 8);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x = rng.normal_vector(4);
    double direct = 1.0;
    for (const auto& wq : ws) direct *= wq.dot(x);
    CHECK(eval_form(t, x) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("dense tensor stores and contracts correctly") {
  DenseTensor d2(2, 3);
  for (int i = 0; i < 3; ++i) d2.at({i, i}) = 1.0;  // identity matrix
  Rng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd x = rng.normal_vector(3);
    CHECK(d2.contract(x) == doctest::Approx(x.squaredNorm()).epsilon(1e-12));
  }
  CHECK(d2.is_symmetric());
  CHECK_THROWS_AS(DenseTensor(8, 10), std::invalid_argument);  // 10^8 over cap
}

TEST_CASE("decompose_symmetric of the identity evaluates to squared norm") {
  DenseTensor d2(2, 3);
  for (int i = 0; i < 3; ++i) d2.at({i, i}) = 1.0;
  RankOneSum t = decompose_symmetric(d2);
  CHECK(t.term_count() <= 4u * 3u);  // 2^p d^{p-1}
  Rng rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd x = rng.normal_vector(3);
    CHECK(eval_form(t, x) == doctest::Approx(x.squaredNorm()).epsilon(1e-10));
  }
}

TEST_CASE("decompose_symmetric reproduces a quartic power") {
  Rng rng(31);
  Eigen::VectorXd v = rng.normal_vector(3);
  DenseTensor dense = DenseTensor::from_rank_one_sum(RankOneSum::power_of(v, 4));
  RankOneSum t = decompose_symmetric(dense);
  CHECK(t.term_count() <= 16u * 27u);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd x = rng.normal_vector(3);
    double expect = std::pow(v.dot(x), 4);
    CHECK(eval_form(t, x) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("decompose_symmetric agrees with dense contraction on random input") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    RankOneSum src = random_sum(3, 4, 4, rng);
    DenseTensor dense = DenseTensor::from_rank_one_sum(src);
    RankOneSum t = decompose_symmetric(dense);
    CHECK(t.term_count() <= 8u * 16u);
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd x = rng.normal_vector(4);
      CHECK(eval_form(t, x) ==
            doctest::Approx(dense.contract(x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("decompose_symmetric rejects asymmetric input") {
  DenseTensor bad(2, 3);
  bad.at({0, 1}) = 1.0;  // no matching {1,0} entry
  CHECK_THROWS_AS(decompose_symmetric(bad), std::invalid_argument);
}

TEST_CASE("rank one sum validates inputs") {
  CHECK_THROWS_AS(RankOneSum(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(RankOneSum(2, 0), std::invalid_argument);
  RankOneSum t(2, 3);
  Eigen::VectorXd wrong(2);
  wrong << 1, 2;
  CHECK_THROWS_AS(t.add_term(1.0, wrong), std::invalid_argument);
  Eigen::VectorXd nan3 = Eigen::VectorXd::Constant(3, std::nan(""));
  CHECK_THROWS_AS(t.add_term(1.0, nan3), std::invalid_argument);
}
