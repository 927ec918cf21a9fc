#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace twolip {

struct RankOneTerm {
  double coef = 0.0;
  Eigen::VectorXd vec;
};

/// Symmetric tensor represented as a sum of symmetric rank-one terms,
/// T = sum_i c_i v_i^{(x) order}. All operations run on this implicit form;
/// nothing here materializes d^order entries.
class RankOneSum {
 public:
  RankOneSum(int order, int dim);

  /// Single-term sum c * v^{(x) order}.
  static RankOneSum power_of(const Eigen::VectorXd& v, int order, double coef = 1.0);

  void add_term(double coef, const Eigen::VectorXd& v);
  void append(const RankOneSum& other);
  void scale(double factor);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t term_count() const { return terms_.size(); }
  const std::vector<RankOneTerm>& terms() const { return terms_; }

 private:
  int order_;
  int dim_;
  std::vector<RankOneTerm> terms_;
};

/// g(x) = <T, x^{(x) p}> = sum_i c_i (v_i . x)^p.
double eval_form(const RankOneSum& t, const Eigen::VectorXd& x);

/// grad g(x) = p * sum_i c_i (v_i . x)^{p-1} v_i.
Eigen::VectorXd form_gradient(const RankOneSum& t, const Eigen::VectorXd& x);

/// <S, T>_F = sum_{i,j} c_i s_j (v_i . u_j)^p. Orders and dims must match.
double frobenius_inner(const RankOneSum& s, const RankOneSum& t);

double frobenius_norm(const RankOneSum& t);

struct OperatorNormResult {
  double value = 0.0;          // best |g(x)| over unit x seen at any iterate
  Eigen::VectorXd witness;     // unit vector achieving value
  bool degenerate = false;     // zero tensor (no usable ascent directions)
  int iterations = 0;          // total ascent iterations across restarts
};

/// Operator norm sup_{|x|=1} |<T, x^{(x) p}>| of a symmetric tensor, via
/// shifted projected gradient ascent on +/-g from several starts: term
/// directions (all of them up to 64, evenly strided beyond that) plus
/// `restarts` seeded random unit vectors. The returned value is the best
/// objective seen at any iterate, so it is always a valid lower bound and
/// never decreases when restarts are added. Ties between starts resolve to
/// the earliest, keeping the result deterministic.
OperatorNormResult operator_norm(const RankOneSum& t, int restarts = 16,
                                 int max_iters = 500, double tol = 1e-10,
                                 std::uint64_t seed = 0x0b5e55ULL);

/// Exact symmetric rank-one expansion of the product form
/// x -> prod_q (w_q . x) with exactly 2^p signed terms (p = ws.size()),
/// built from the identity
///   prod_q t_q = sum_{eps in {-1,+1}^p} (prod_q eps_q) (sum_q eps_q t_q)^p / (p! 2^p).
RankOneSum polarize_product(const std::vector<Eigen::VectorXd>& ws);

/// Dense symmetric tensor, used as an oracle for the implicit representation
/// and as input to decompose_symmetric. Entry count d^order is capped.
class DenseTensor {
 public:
  static constexpr std::size_t kMaxEntries = 1000000;

  DenseTensor(int order, int dim);

  static DenseTensor from_rank_one_sum(const RankOneSum& t);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t entry_count() const { return entries_.size(); }

  double& at(const std::vector<int>& index);
  double at(const std::vector<int>& index) const;

  const std::vector<double>& entries() const { return entries_; }
  std::vector<double>& entries() { return entries_; }

  /// Full contraction <T, x^{(x) order}> summing all d^order entries.
  double contract(const Eigen::VectorXd& x) const;

  /// Checks invariance under `checks` random index permutations.
  bool is_symmetric(int checks = 64, double tol = 1e-12,
                    std::uint64_t seed = 1) const;

 private:
  std::size_t flat_index(const std::vector<int>& index) const;

  int order_;
  int dim_;
  std::vector<double> entries_;
};

/// Rewrites a dense symmetric tensor as a rank-one sum with at most
/// 2^p * d^{p-1} terms: slice the first p-1 indices, polarize each product
/// e_{i_1} x ... x e_{i_{p-1}} x D[i_1,..,i_{p-1},.], and concatenate.
/// Requires D symmetric (spot-checked); zero slices are skipped.
RankOneSum decompose_symmetric(const DenseTensor& dense);

}  // namespace twolip
