#include "twolip/network.hpp"

#include "twolip/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace twolip {

namespace {

double int_pow(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace

Activation Activation::relu() { return Activation{Kind::ReLU, 0, {}}; }

Activation Activation::power_fn(int p) {
  Activation act{Kind::Power, p, {}};
  act.validate();
  return act;
}

Activation Activation::poly(std::vector<double> coeffs) {
  Activation act{Kind::Poly, 0, std::move(coeffs)};
  act.validate();
  return act;
}

void Activation::validate() const {
  switch (kind) {
    case Kind::ReLU:
      return;
    case Kind::Power:
      if (power < 1) throw std::invalid_argument("power activation needs p >= 1");
      return;
    case Kind::Poly:
      if (coeffs.size() < 2)
        throw std::invalid_argument("poly activation needs degree >= 1");
      if (coeffs.back() == 0.0)
        throw std::invalid_argument("poly activation needs a nonzero leading coefficient");
      for (double c : coeffs)
        if (!std::isfinite(c))
          throw std::invalid_argument("poly coefficient is not finite");
      return;
  }
  throw std::logic_error("unknown activation kind");
}

double Activation::value(double t) const {
  switch (kind) {
    case Kind::ReLU:
      return t > 0.0 ? t : 0.0;
    case Kind::Power:
      return int_pow(t, power);
    case Kind::Poly: {
      double out = 0.0;
      for (std::size_t q = coeffs.size(); q-- > 0;) out = out * t + coeffs[q];
      return out;
    }
  }
  throw std::logic_error("unknown activation kind");
}

double Activation::derivative(double t) const {
  switch (kind) {
    case Kind::ReLU:
      return t > 0.0 ? 1.0 : 0.0;
    case Kind::Power:
      return power * int_pow(t, power - 1);
    case Kind::Poly: {
      double out = 0.0;
      for (std::size_t q = coeffs.size(); q-- > 1;)
        out = out * t + static_cast<double>(q) * coeffs[q];
      return out;
    }
  }
  throw std::logic_error("unknown activation kind");
}

int Activation::degree() const {
  switch (kind) {
    case Kind::ReLU:
      return -1;
    case Kind::Power:
      return power;
    case Kind::Poly:
      return static_cast<int>(coeffs.size()) - 1;
  }
  throw std::logic_error("unknown activation kind");
}

void TwoLayerNet::validate() const {
  activation.validate();
  const int k = neuron_count();
  if (a.size() != k || b.size() != k)
    throw std::invalid_argument("network: a, W, b sizes disagree");
  if (input_dim() < 1) throw std::invalid_argument("network: input dim must be >= 1");
  if (!a.allFinite() || !w.allFinite() || !b.allFinite())
    throw std::invalid_argument("network: parameters are not finite");
}

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim())
    throw std::invalid_argument("forward: dim mismatch");
  Eigen::VectorXd pre = net.w * x + net.b;
  double out = 0.0;
  for (int l = 0; l < net.neuron_count(); ++l)
    out += net.a[l] * net.activation.value(pre[l]);
  return out;
}

Eigen::VectorXd forward_batch(const TwoLayerNet& net, const Eigen::MatrixXd& xs) {
  if (xs.cols() != net.input_dim())
    throw std::invalid_argument("forward_batch: dim mismatch");
  Eigen::MatrixXd pre = xs * net.w.transpose();  // rows x k
  pre.rowwise() += net.b.transpose();
  Eigen::VectorXd out(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    double acc = 0.0;
    for (int l = 0; l < net.neuron_count(); ++l)
      acc += net.a[l] * net.activation.value(pre(i, l));
    out[i] = acc;
  }
  return out;
}

Eigen::VectorXd gradient(const TwoLayerNet& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim())
    throw std::invalid_argument("gradient: dim mismatch");
  Eigen::VectorXd pre = net.w * x + net.b;
  Eigen::VectorXd scale(net.neuron_count());
  for (int l = 0; l < net.neuron_count(); ++l)
    scale[l] = net.a[l] * net.activation.derivative(pre[l]);
  return net.w.transpose() * scale;
}

double matrix_operator_norm(const Eigen::MatrixXd& m, int max_iters, double tol) {
  if (m.size() == 0) return 0.0;
  // Iterate on the smaller side of M^T M / M M^T.
  const bool tall = m.rows() >= m.cols();
  const Eigen::Index dim = tall ? m.cols() : m.rows();
  Rng rng(0x5eed);
  Eigen::VectorXd x = rng.unit_vector(static_cast<int>(dim));
  double value = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd y = tall ? Eigen::VectorXd(m.transpose() * (m * x))
                             : Eigen::VectorXd(m * (m.transpose() * x));
    double norm = y.norm();
    if (norm == 0.0) return 0.0;
    // x is unit, so x.y = |Mx|^2: a Rayleigh-quotient lower bound.
    double next = std::sqrt(std::max(0.0, x.dot(y)));
    x = y / norm;
    if (it > 0 && std::abs(next - value) <= tol * std::max(1.0, next)) {
      value = next;
      break;
    }
    value = next;
  }
  return value;
}

double activation_derivative_bound(const Activation& act, double r) {
  if (act.kind == Activation::Kind::ReLU) return 1.0;
  if (!(r >= 0.0)) throw std::invalid_argument("activation bound: r must be >= 0");
  // |psi'| is piecewise monotone with few extrema; a dense grid plus the
  // endpoints over-samples it comfortably for the degrees used here.
  const int grid = 4096;
  double best = 0.0;
  for (int i = 0; i <= grid; ++i) {
    double t = -r + (2.0 * r) * (static_cast<double>(i) / grid);
    best = std::max(best, std::abs(act.derivative(t)));
  }
  best = std::max(best, std::abs(act.derivative(r)));
  best = std::max(best, std::abs(act.derivative(-r)));
  return best;
}

double spectral_proxy(const TwoLayerNet& net, double radius) {
  net.validate();
  if (!(radius > 0.0)) throw std::invalid_argument("spectral_proxy: radius must be > 0");
  double row_max = 0.0;
  for (int l = 0; l < net.neuron_count(); ++l)
    row_max = std::max(row_max, net.w.row(l).norm());
  double bias_max = net.b.size() > 0 ? net.b.cwiseAbs().maxCoeff() : 0.0;
  double r = radius * row_max + bias_max;
  return activation_derivative_bound(net.activation, r) * net.a.norm() *
         matrix_operator_norm(net.w);
}

HomogeneousParts extract_homogeneous(const TwoLayerNet& net) {
  net.validate();
  const int p = net.activation.degree();
  if (p < 0)
    throw std::invalid_argument("extract_homogeneous: needs a polynomial activation");

  // psi(t) = sum_r alpha_r t^r with t = w.x + b expands, per neuron, into
  // powers of (w.x) with coefficients beta_q(b) = sum_{r>=q} alpha_r C(r,q) b^{r-q}.
  std::vector<double> alpha(static_cast<std::size_t>(p) + 1, 0.0);
  if (net.activation.kind == Activation::Kind::Power) {
    alpha[static_cast<std::size_t>(p)] = 1.0;
  } else {
    for (std::size_t q = 0; q < net.activation.coeffs.size(); ++q)
      alpha[q] = net.activation.coeffs[q];
  }

  // binom[r][q] for r, q <= p.
  std::vector<std::vector<double>> binom(static_cast<std::size_t>(p) + 1,
                                         std::vector<double>(static_cast<std::size_t>(p) + 1, 0.0));
  for (int r = 0; r <= p; ++r) {
    binom[r][0] = 1.0;
    for (int q = 1; q <= r; ++q)
      binom[r][q] = binom[r - 1][q - 1] + (q <= r - 1 ? binom[r - 1][q] : 0.0);
  }

  HomogeneousParts out;
  out.parts.reserve(static_cast<std::size_t>(p));
  for (int q = 1; q <= p; ++q)
    out.parts.emplace_back(q, net.input_dim());

  for (int l = 0; l < net.neuron_count(); ++l) {
    const double b = net.b[l];
    for (int q = 0; q <= p; ++q) {
      double beta = 0.0;
      for (int r = q; r <= p; ++r)
        beta += alpha[static_cast<std::size_t>(r)] * binom[r][q] * int_pow(b, r - q);
      double coef = net.a[l] * beta;
      if (coef == 0.0) continue;
      if (q == 0) {
        out.constant += coef;
      } else {
        out.parts[static_cast<std::size_t>(q) - 1].add_term(coef, net.w.row(l).transpose());
      }
    }
  }
  return out;
}

}  // namespace twolip
