#include "twolip/constructors.hpp"

#include "twolip/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace twolip {

double ConstructionReport::eval(const Eigen::VectorXd& x) const {
  if (const auto* net = std::get_if<TwoLayerNet>(&model)) return forward(*net, x);
  return eval_form(std::get<RankOneSum>(model), x);
}

Eigen::VectorXd ConstructionReport::eval_gradient(const Eigen::VectorXd& x) const {
  if (const auto* net = std::get_if<TwoLayerNet>(&model)) return gradient(*net, x);
  return form_gradient(std::get<RankOneSum>(model), x);
}

namespace {

constexpr double kMaxGramCondition = 1e12;

/// Minimum-norm solution of X w = y for row-independent X (rows <= cols),
/// via an eigendecomposition of the Gram matrix X X^T so the condition
/// number can be gated explicitly.
Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const char* who) {
  if (x.rows() > x.cols()) {
    std::ostringstream msg;
    msg << who << ": precondition n <= d fails (" << x.rows() << " > " << x.cols()
        << ")";
    throw ConstructionError(msg.str());
  }
  Eigen::MatrixXd gram = x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw ConstructionError(std::string(who) + ": Gram eigendecomposition failed");
  const auto& lambda = eig.eigenvalues();
  double lo = lambda.minCoeff();
  double hi = lambda.maxCoeff();
  if (lo <= 0.0 || hi / lo > kMaxGramCondition) {
    std::ostringstream msg;
    msg << who << ": precondition on Gram conditioning fails (estimate "
        << (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity())
        << " > 1e12)";
    throw ConstructionError(msg.str());
  }
  Eigen::VectorXd alpha =
      eig.eigenvectors() *
      (eig.eigenvectors().transpose() * y).cwiseQuotient(lambda);
  return x.transpose() * alpha;
}

void finish_report(ConstructionReport& report, const GenericDataset& ds) {
  double worst = 0.0;
  for (int i = 0; i < ds.n(); ++i)
    worst = std::max(worst,
                     std::abs(report.eval(ds.points.row(i).transpose()) - ds.labels[i]));
  report.max_residual = worst;
  report.exact_fit = worst <= kExactFitTol;
}

}  // namespace

ConstructionReport min_norm_linear(const GenericDataset& ds) {
  Eigen::VectorXd w = min_norm_solve(ds.points, ds.labels, "min_norm_linear");

  TwoLayerNet net;
  net.a = Eigen::VectorXd::Ones(1);
  net.w = w.transpose();
  net.b = Eigen::VectorXd::Zero(1);
  net.activation = Activation::power_fn(1);

  ConstructionReport report;
  report.model = std::move(net);
  report.validation.weight_norm = w.norm();
  finish_report(report, ds);
  return report;
}

ConstructionReport cap_network(const GenericDataset& ds, double threshold,
                               double scale) {
  if (std::abs(scale * (1.0 - threshold) - 1.0) > 1e-12)
    throw std::invalid_argument("cap_network: need scale * (1 - threshold) = 1");

  const int n = ds.n();
  TwoLayerNet net;
  net.a.resize(n);
  net.w = ds.points;
  net.b = Eigen::VectorXd::Constant(n, -threshold);
  net.activation = Activation::relu();
  for (int i = 0; i < n; ++i) net.a[i] = scale * ds.labels[i];

  ConstructionReport report;
  report.model = std::move(net);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (ds.points.row(i).dot(ds.points.row(j)) >= threshold)
        report.validation.cap_overlaps.emplace_back(i, j);
  finish_report(report, ds);
  return report;
}

namespace {

struct GroupSolution {
  std::vector<int> members;
  Eigen::VectorXd w;
  double margin = 0.0;   // max |w.x_i| over points outside the group
  int worst_point = -1;  // index attaining the margin
};

/// Chunk `order` into runs of at most m, solve each group's min-norm system,
/// and measure margins against all points outside the group. Returns false
/// as soon as one group misses the margin (reported in `offender`).
bool solve_class_groups(const GenericDataset& ds, const std::vector<int>& order,
                        int m, std::vector<GroupSolution>& out,
                        GroupSolution& offender) {
  const int n = ds.n();
  for (std::size_t start = 0; start < order.size(); start += m) {
    GroupSolution sol;
    std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(m));
    sol.members.assign(order.begin() + start, order.begin() + stop);

    Eigen::MatrixXd xg(sol.members.size(), ds.d());
    for (std::size_t r = 0; r < sol.members.size(); ++r)
      xg.row(r) = ds.points.row(sol.members[r]);
    sol.w = min_norm_solve(xg, Eigen::VectorXd::Ones(sol.members.size()),
                           "grouped_cap_network");

    std::vector<bool> in_group(n, false);
    for (int i : sol.members) in_group[i] = true;
    Eigen::VectorXd inner = ds.points * sol.w;
    for (int i = 0; i < n; ++i) {
      if (in_group[i]) continue;
      double v = std::abs(inner[i]);
      if (v > sol.margin) {
        sol.margin = v;
        sol.worst_point = i;
      }
    }
    if (sol.margin >= 0.5) {
      offender = std::move(sol);
      return false;
    }
    out.push_back(std::move(sol));
  }
  return true;
}

}  // namespace

ConstructionReport grouped_cap_network(const GenericDataset& ds, int k, int retries) {
  const int n = ds.n();
  const int d = ds.d();
  if (k < 1 || k > n)
    throw std::invalid_argument("grouped_cap_network: k must be in [1, n]");
  if (retries < 1)
    throw std::invalid_argument("grouped_cap_network: retries must be >= 1");
  const int m = (n + k - 1) / k;
  if (4 * m > d) {
    std::ostringstream msg;
    msg << "grouped_cap_network: precondition m <= d/4 fails (m " << m << ", d " << d
        << ")";
    throw ConstructionError(msg.str());
  }

  std::vector<int> pos, neg;
  for (int i = 0; i < n; ++i) (ds.labels[i] > 0 ? pos : neg).push_back(i);

  // One stream drives every reshuffle; a failed class is reshuffled and
  // re-solved on its own, the other class is untouched.
  Rng shuffler(mix_seed({ds.config.seed, 0x67726F7570ULL}));
  std::vector<GroupSolution> groups;
  std::vector<double> group_labels;
  int retries_used = 0;

  for (const auto& [cls, label] : {std::pair(&pos, 1.0), std::pair(&neg, -1.0)}) {
    if (cls->empty()) continue;
    bool ok = false;
    GroupSolution offender;
    for (int attempt = 0; attempt < retries; ++attempt) {
      std::vector<int> order = *cls;
      shuffler.shuffle(order);
      std::vector<GroupSolution> solved;
      if (solve_class_groups(ds, order, m, solved, offender)) {
        for (auto& sol : solved) {
          groups.push_back(std::move(sol));
          group_labels.push_back(label);
        }
        retries_used += attempt;
        ok = true;
        break;
      }
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "grouped_cap_network: margin check failed for every one of " << retries
          << " shuffles (label " << label << ", group of point " << offender.members[0]
          << " vs point " << offender.worst_point << ", |w.x| = " << offender.margin
          << " >= 0.5; n " << n << ", d " << d << ", group size " << m << ")";
      throw ConstructionError(msg.str());
    }
  }

  const int g_count = static_cast<int>(groups.size());
  TwoLayerNet net;
  net.a.resize(g_count);
  net.w.resize(g_count, d);
  net.b = Eigen::VectorXd::Constant(g_count, -0.5);
  net.activation = Activation::relu();

  ConstructionReport report;
  report.validation.retries_used = retries_used;
  for (int g = 0; g < g_count; ++g) {
    net.w.row(g) = groups[g].w.transpose();
    net.a[g] = 2.0 * group_labels[g];
    report.validation.group_sizes.push_back(static_cast<int>(groups[g].members.size()));
    report.validation.group_norms.push_back(groups[g].w.norm());
    report.validation.group_margins.push_back(groups[g].margin);
  }
  report.model = std::move(net);
  finish_report(report, ds);
  return report;
}

ConstructionReport tensor_network(const GenericDataset& ds, int p, bool decompose) {
  if (p < 2 || p % 2 != 0)
    throw std::invalid_argument("tensor_network: p must be even and >= 2");

  RankOneSum t(p, ds.d());
  for (int i = 0; i < ds.n(); ++i)
    t.add_term(ds.labels[i], ds.points.row(i).transpose());

  ConstructionReport report;
  if (decompose) {
    RankOneSum expanded = decompose_symmetric(DenseTensor::from_rank_one_sum(t));
    TwoLayerNet net;
    const int terms = static_cast<int>(expanded.term_count());
    net.a.resize(terms);
    net.w.resize(terms, ds.d());
    net.b = Eigen::VectorXd::Zero(terms);
    net.activation = Activation::power_fn(p);
    for (int i = 0; i < terms; ++i) {
      net.a[i] = expanded.terms()[i].coef;
      net.w.row(i) = expanded.terms()[i].vec.transpose();
    }

    // The neuron form must be the same function; spot-check 20 points.
    Rng probe(mix_seed({ds.config.seed, 0x646563ULL}));
    for (int c = 0; c < 20; ++c) {
      Eigen::VectorXd x = probe.unit_vector(ds.d());
      double lhs = forward(net, x);
      double rhs = eval_form(t, x);
      if (std::abs(lhs - rhs) > 1e-9 * std::max({1.0, std::abs(lhs), std::abs(rhs)})) {
        std::ostringstream msg;
        msg << "tensor_network: decomposed form disagrees with the tensor ("
            << lhs << " vs " << rhs << ")";
        throw ConstructionError(msg.str());
      }
    }
    report.neuron_form = std::move(net);
  }
  report.model = std::move(t);
  finish_report(report, ds);
  return report;
}

}  // namespace twolip
