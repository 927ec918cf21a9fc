#include "twolip/bounds.hpp"

#include "twolip/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twolip {

namespace {

double ipow(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

RankOneSum omega_tensor(const GenericDataset& ds, int p) {
  RankOneSum omega(p, ds.d());
  for (int i = 0; i < ds.n(); ++i)
    omega.add_term(ds.labels[i], ds.points.row(i).transpose());
  return omega;
}

double max_abs_residual(const EvalFn& eval_fn, const GenericDataset& ds) {
  double worst = 0.0;
  for (int i = 0; i < ds.n(); ++i)
    worst = std::max(worst,
                     std::abs(eval_fn(ds.points.row(i).transpose()) - ds.labels[i]));
  return worst;
}

}  // namespace

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::Spectral: return "spectral";
    case CertificateKind::Tensor: return "tensor";
    case CertificateKind::Quadratic: return "quadratic";
    case CertificateKind::Polynomial: return "polynomial";
  }
  throw std::logic_error("unknown certificate kind");
}

double Certificate::component(const std::string& name) const {
  for (const auto& [key, value] : components)
    if (key == name) return value;
  throw std::out_of_range("certificate has no component named " + name);
}

double max_random_gradient(const GradFn& grad_fn, int d, int probes,
                           DataModel model, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("max_random_gradient: probes >= 1");
  Rng rng(seed);
  double best = 0.0;
  for (int t = 0; t < probes; ++t)
    best = std::max(best, grad_fn(sample_point(model, d, rng)).norm());
  return best;
}

double pairwise_slope_lb(const EvalFn& eval_fn, const GenericDataset& ds) {
  std::vector<int> pos, neg;
  for (int i = 0; i < ds.n(); ++i)
    (ds.labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw std::domain_error("pairwise_slope_lb: needs both labels present");

  Eigen::VectorXd values(ds.n());
  for (int i = 0; i < ds.n(); ++i) values[i] = eval_fn(ds.points.row(i).transpose());

  double best = 0.0;
  for (int i : pos) {
    for (int j : neg) {
      double dist = (ds.points.row(i) - ds.points.row(j)).norm();
      if (dist == 0.0) continue;
      best = std::max(best, std::abs(values[i] - values[j]) / dist);
    }
  }
  return best;
}

LipschitzReport lipschitz_report(const TwoLayerNet& net, const GenericDataset& ds,
                                 int probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("lipschitz_report: probes >= 1");
  LipschitzReport report;
  report.probe_count = probes;
  report.seed = seed;

  // Replay the probe stream once so the proxy ball can cover every probe.
  Rng rng(seed);
  double max_norm = 0.0;
  for (int i = 0; i < ds.n(); ++i)
    max_norm = std::max(max_norm, ds.points.row(i).norm());
  double best = 0.0;
  for (int t = 0; t < probes; ++t) {
    Eigen::VectorXd z = sample_point(ds.config.model, ds.d(), rng);
    max_norm = std::max(max_norm, z.norm());
    best = std::max(best, gradient(net, z).norm());
  }
  report.max_random_gradient = best;
  report.pairwise_slope_lb =
      pairwise_slope_lb([&](const Eigen::VectorXd& x) { return forward(net, x); }, ds);
  report.spectral_proxy = spectral_proxy(net, std::max(max_norm, 1e-12));
  return report;
}

Certificate spectral_certificate(const TwoLayerNet& net, const GenericDataset& ds,
                                 double fit_tol) {
  net.validate();
  const int n = ds.n();
  const int k = net.neuron_count();
  double residual =
      max_abs_residual([&](const Eigen::VectorXd& x) { return forward(net, x); }, ds);
  if (residual > fit_tol) {
    std::ostringstream msg;
    msg << "spectral_certificate: fit precondition fails (max residual " << residual
        << " > " << fit_tol << ")";
    throw CertificateRefused(msg.str());
  }

  double max_norm = 0.0;
  for (int i = 0; i < n; ++i)
    max_norm = std::max(max_norm, ds.points.row(i).norm());
  double lip = net.activation.kind == Activation::Kind::ReLU
                   ? 1.0
                   : activation_derivative_bound(
                         net.activation,
                         [&] {
                           double row_max = 0.0;
                           for (int l = 0; l < k; ++l)
                             row_max = std::max(row_max, net.w.row(l).norm());
                           double bias_max =
                               net.b.size() > 0 ? net.b.cwiseAbs().maxCoeff() : 0.0;
                           return max_norm * row_max + bias_max;
                         }());
  double a_norm = net.a.norm();
  double w_op = matrix_operator_norm(net.w);
  double w_fro = net.w.norm();
  double weighted_rows = 0.0;
  for (int l = 0; l < k; ++l) weighted_rows += std::abs(net.a[l]) * net.w.row(l).norm();

  Certificate cert;
  cert.kind = CertificateKind::Spectral;
  cert.lower_bound = lip * a_norm * w_op;
  cert.conjectured_floor = std::sqrt(static_cast<double>(n) / k);
  cert.add("psi_lip", lip);
  cert.add("a_norm", a_norm);
  cert.add("w_op", w_op);
  cert.add("weighted_row_sum", weighted_rows);
  cert.add("w_fro", w_fro);
  cert.add("chain_mid", a_norm * w_fro);
  cert.add("chain_right", std::sqrt(static_cast<double>(k)) * a_norm * w_op);
  cert.add("max_residual", residual);
  cert.add("n", n);
  cert.add("k", k);

  // sum_l |a_l||w_l| <= |a||W|_F <= sqrt(k)|a||W|_op must hold identically.
  const double slack = 1e-9;
  if (weighted_rows > a_norm * w_fro * (1.0 + slack) ||
      a_norm * w_fro > std::sqrt(static_cast<double>(k)) * a_norm * w_op * (1.0 + slack))
    throw std::logic_error("spectral_certificate: Cauchy-Schwarz chain violated");

  if (net.b.size() > 0 && net.b.cwiseAbs().maxCoeff() > 0.0)
    cert.notes.push_back("bias terms present; the floor's derivation assumes none");
  return cert;
}

Certificate tensor_certificate(const RankOneSum& t, const GenericDataset& ds) {
  const int p = t.order();
  if (p < 2) throw std::invalid_argument("tensor_certificate: order must be >= 2");
  if (t.dim() != ds.d())
    throw std::invalid_argument("tensor_certificate: dimension mismatch");
  const int n = ds.n();
  const int d = ds.d();

  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += ds.labels[i] * eval_form(t, ds.points.row(i).transpose());
  if (s <= 0.0) {
    std::ostringstream msg;
    msg << "tensor_certificate: fit too poor for the chain to bind (s = " << s << ")";
    throw CertificateRefused(msg.str());
  }

  RankOneSum omega = omega_tensor(ds, p);
  OperatorNormResult omega_op = operator_norm(omega);
  if (omega_op.value <= 0.0)
    throw CertificateRefused("tensor_certificate: Omega operator norm is zero");
  const double d_pow = ipow(static_cast<double>(d), p - 1);

  Certificate cert;
  cert.kind = CertificateKind::Tensor;
  cert.lower_bound = s / (d_pow * omega_op.value);
  cert.conjectured_floor = std::sqrt(static_cast<double>(n) / d_pow);
  cert.add("s", s);
  cert.add("omega_op", omega_op.value);
  cert.add("d_pow", d_pow);
  cert.add("n", n);
  cert.add("p", p);
  return cert;
}

Certificate quadratic_certificate(const RankOneSum& t, const GenericDataset& ds,
                                  int rank_k) {
  if (t.order() != 2)
    throw std::invalid_argument("quadratic_certificate: order must be 2");
  if (t.dim() != ds.d())
    throw std::invalid_argument("quadratic_certificate: dimension mismatch");
  if (rank_k < 1) throw std::invalid_argument("quadratic_certificate: rank_k >= 1");
  const int n = ds.n();
  const int d = ds.d();

  // Measure the numerical rank through the dense symmetric matrix.
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(d, d);
  for (const auto& term : t.terms())
    mat.noalias() += term.coef * term.vec * term.vec.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mat);
  Eigen::VectorXd sv = eig.eigenvalues().cwiseAbs();
  double sigma_max = sv.maxCoeff();
  int rank = 0;
  for (int i = 0; i < d; ++i)
    if (sv[i] > 1e-10 * sigma_max) ++rank;
  if (rank > rank_k) {
    std::ostringstream msg;
    msg << "quadratic_certificate: measured rank " << rank << " exceeds rank_k "
        << rank_k;
    throw CertificateRefused(msg.str());
  }

  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += ds.labels[i] * eval_form(t, ds.points.row(i).transpose());
  RankOneSum omega = omega_tensor(ds, 2);
  OperatorNormResult omega_op = operator_norm(omega);
  if (omega_op.value <= 0.0)
    throw CertificateRefused("quadratic_certificate: Omega operator norm is zero");

  Certificate cert;
  cert.kind = CertificateKind::Quadratic;
  cert.lower_bound = s / (rank_k * omega_op.value);
  cert.conjectured_floor = std::sqrt(static_cast<double>(n) * d) / rank_k;
  cert.add("s", s);
  cert.add("omega_op", omega_op.value);
  cert.add("rank_measured", rank);
  cert.add("rank_k", rank_k);
  cert.add("n", n);
  return cert;
}

Certificate polynomial_certificate(const TwoLayerNet& net, const GenericDataset& ds,
                                   double fit_tol) {
  net.validate();
  if (net.activation.degree() < 1)
    throw std::invalid_argument("polynomial_certificate: needs a polynomial activation");
  const int p = net.activation.degree();
  const int d = ds.d();

  std::vector<int> subset = balanced_subset(ds);
  if (subset.empty())
    throw CertificateRefused("polynomial_certificate: balanced subset is empty");

  GenericDataset sub;
  sub.config = ds.config;
  sub.config.n = static_cast<int>(subset.size());
  sub.points.resize(subset.size(), d);
  sub.labels.resize(subset.size());
  for (std::size_t r = 0; r < subset.size(); ++r) {
    sub.points.row(r) = ds.points.row(subset[r]);
    sub.labels[r] = ds.labels[subset[r]];
  }

  double residual =
      max_abs_residual([&](const Eigen::VectorXd& x) { return forward(net, x); }, sub);
  if (residual > fit_tol) {
    std::ostringstream msg;
    msg << "polynomial_certificate: fit precondition fails on the balanced subset "
        << "(max residual " << residual << " > " << fit_tol << ")";
    throw CertificateRefused(msg.str());
  }

  HomogeneousParts parts = extract_homogeneous(net);

  // s_q = <T_q, Omega_q> on the balanced subset; the q = 0 term pairs with
  // sum of labels = 0 and drops out by construction.
  std::vector<double> s(static_cast<std::size_t>(p) + 1, 0.0);
  std::vector<RankOneSum> omegas;
  omegas.reserve(static_cast<std::size_t>(p));
  for (int q = 1; q <= p; ++q) {
    omegas.push_back(omega_tensor(sub, q));
    s[q] = frobenius_inner(parts.parts[static_cast<std::size_t>(q) - 1], omegas.back());
  }

  int q_star = 0;
  for (int q = 1; q <= p; ++q)
    if (q_star == 0 || s[q] > s[q_star]) q_star = q;
  if (s[q_star] <= 0.0) {
    std::ostringstream msg;
    msg << "polynomial_certificate: every homogeneous pairing is <= 0 (best s_"
        << q_star << " = " << s[q_star] << ")";
    throw CertificateRefused(msg.str());
  }

  OperatorNormResult omega_op = operator_norm(omegas[static_cast<std::size_t>(q_star) - 1]);
  if (omega_op.value <= 0.0)
    throw CertificateRefused("polynomial_certificate: Omega_q operator norm is zero");

  double q_factorial = 1.0;
  for (int q = 2; q <= q_star; ++q) q_factorial *= q;
  const double d_pow = ipow(static_cast<double>(d), q_star - 1);

  Certificate cert;
  cert.kind = CertificateKind::Polynomial;
  cert.lower_bound = s[q_star] / (d_pow * omega_op.value * q_factorial);
  cert.conjectured_floor =
      std::sqrt(static_cast<double>(ds.n()) / ipow(static_cast<double>(d), p - 1));
  for (int q = 1; q <= p; ++q) cert.add("s_" + std::to_string(q), s[q]);
  cert.add("q_star", q_star);
  cert.add("q_factorial", q_factorial);
  cert.add("omega_op", omega_op.value);
  cert.add("d_pow", d_pow);
  cert.add("balanced_n", sub.n());
  cert.add("n", ds.n());
  cert.add("p", p);
  return cert;
}

RandomTensorStats random_tensor_stats(const GenericDataset& ds, int p, int probes) {
  if (p < 1) throw std::invalid_argument("random_tensor_stats: p >= 1");
  if (probes < 0) throw std::invalid_argument("random_tensor_stats: probes >= 0");
  const int n = ds.n();
  const int d = ds.d();

  RandomTensorStats stats;
  stats.seed = mix_seed({ds.config.seed, 0x6f6d656761ULL});
  RankOneSum omega = omega_tensor(ds, p);
  stats.opnorm = operator_norm(omega).value;
  stats.ratio = stats.opnorm * std::sqrt(ipow(static_cast<double>(d), p - 1) / n);

  Rng rng(stats.seed);
  const double scale = std::sqrt(ipow(static_cast<double>(d), p) / n);
  stats.fixed_x_values.reserve(static_cast<std::size_t>(probes));
  for (int t = 0; t < probes; ++t) {
    Eigen::VectorXd x = rng.unit_vector(d);
    stats.fixed_x_values.push_back(std::abs(eval_form(omega, x)) * scale);
  }
  return stats;
}

}  // namespace twolip
