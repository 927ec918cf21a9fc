#include "twolip/tensor.hpp"

#include "twolip/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace twolip {

namespace {

double int_pow(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

void check_finite(double coef, const Eigen::VectorXd& v) {
  if (!std::isfinite(coef) || !v.allFinite())
    throw std::invalid_argument("rank-one term has non-finite entries");
}

}  // namespace

RankOneSum::RankOneSum(int order, int dim) : order_(order), dim_(dim) {
  if (order < 1) throw std::invalid_argument("tensor order must be >= 1");
  if (dim < 1) throw std::invalid_argument("tensor dim must be >= 1");
}

RankOneSum RankOneSum::power_of(const Eigen::VectorXd& v, int order, double coef) {
  RankOneSum t(order, static_cast<int>(v.size()));
  t.add_term(coef, v);
  return t;
}

void RankOneSum::add_term(double coef, const Eigen::VectorXd& v) {
  if (v.size() != dim_)
    throw std::invalid_argument("rank-one term dim mismatch");
  check_finite(coef, v);
  terms_.push_back({coef, v});
}

void RankOneSum::append(const RankOneSum& other) {
  if (other.order_ != order_ || other.dim_ != dim_)
    throw std::invalid_argument("cannot append rank-one sums of different shape");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
}

void RankOneSum::scale(double factor) {
  if (!std::isfinite(factor))
    throw std::invalid_argument("scale factor must be finite");
  for (auto& term : terms_) term.coef *= factor;
}

double eval_form(const RankOneSum& t, const Eigen::VectorXd& x) {
  if (x.size() != t.dim()) throw std::domain_error("eval_form: dim mismatch");
  double out = 0.0;
  for (const auto& term : t.terms())
    out += term.coef * int_pow(term.vec.dot(x), t.order());
  return out;
}

Eigen::VectorXd form_gradient(const RankOneSum& t, const Eigen::VectorXd& x) {
  if (x.size() != t.dim())
    throw std::domain_error("form_gradient: dim mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(t.dim());
  const int p = t.order();
  for (const auto& term : t.terms())
    g += (p * term.coef * int_pow(term.vec.dot(x), p - 1)) * term.vec;
  return g;
}

double frobenius_inner(const RankOneSum& s, const RankOneSum& t) {
  if (s.order() != t.order() || s.dim() != t.dim())
    throw std::domain_error("frobenius_inner: shape mismatch");
  const int p = s.order();
  double out = 0.0;
  for (const auto& a : s.terms())
    for (const auto& b : t.terms())
      out += a.coef * b.coef * int_pow(a.vec.dot(b.vec), p);
  return out;
}

double frobenius_norm(const RankOneSum& t) {
  return std::sqrt(std::max(0.0, frobenius_inner(t, t)));
}

OperatorNormResult operator_norm(const RankOneSum& t, int restarts,
                                 int max_iters, double tol, std::uint64_t seed) {
  const int p = t.order();
  const int d = t.dim();
  OperatorNormResult result;
  result.witness = Eigen::VectorXd::Unit(d, 0);

  const double fro = frobenius_norm(t);
  if (t.term_count() == 0 || fro == 0.0) {
    result.degenerate = true;
    return result;
  }

  // Pack the terms into matrix form: one ascent step is two small GEMVs.
  const int m = static_cast<int>(t.term_count());
  Eigen::MatrixXd v_mat(m, d);
  Eigen::VectorXd coef(m);
  for (int i = 0; i < m; ++i) {
    v_mat.row(i) = t.terms()[i].vec.transpose();
    coef[i] = t.terms()[i].coef;
  }

  // Starting points: up to 64 term directions (evenly strided through the
  // term list), then `restarts` random unit vectors.
  std::vector<Eigen::VectorXd> starts;
  const int term_starts = std::min(m, 64);
  for (int j = 0; j < term_starts; ++j) {
    int idx = static_cast<int>((static_cast<long long>(j) * m) / term_starts);
    double norm = v_mat.row(idx).norm();
    if (norm > 0.0) starts.push_back(v_mat.row(idx).transpose() / norm);
  }
  Rng rng(seed);
  for (int j = 0; j < restarts; ++j) starts.push_back(rng.unit_vector(d));

  // Shift makes the ascent map monotone for p >= 3. For p <= 2 the plain
  // iteration is already monotone in |g| and converges much faster, and the
  // two sign runs coincide, so only one is made.
  const double shift = (p >= 3) ? (p - 1) * fro : 0.0;
  std::vector<double> sigmas = (shift > 0.0) ? std::vector<double>{1.0, -1.0}
                                             : std::vector<double>{1.0};

  auto consider = [&](double value, const Eigen::VectorXd& x) {
    if (std::abs(value) > result.value) {
      result.value = std::abs(value);
      result.witness = x;
    }
  };

  Eigen::VectorXd projections(m), weights(m), y(d);
  for (double sigma : sigmas) {
    for (const Eigen::VectorXd& start : starts) {
      Eigen::VectorXd x = start;
      double prev = std::numeric_limits<double>::quiet_NaN();
      for (int it = 0; it < max_iters; ++it) {
        projections.noalias() = v_mat * x;
        double g = 0.0;
        for (int i = 0; i < m; ++i) {
          double powm1 = int_pow(projections[i], p - 1);
          weights[i] = coef[i] * powm1;
          g += weights[i] * projections[i];
        }
        consider(g, x);
        ++result.iterations;
        if (it > 0 && std::abs(g - prev) <= tol * std::max(1.0, std::abs(g)))
          break;
        prev = g;
        // grad g / p = V^T (coef .* proj^{p-1}); shifted projected step.
        y.noalias() = v_mat.transpose() * weights;
        y = sigma * y + shift * x;
        double norm = y.norm();
        if (norm == 0.0) break;
        x = y / norm;
      }
      // The last step's point was never scored inside the loop.
      consider(eval_form(t, x), x);
    }
  }
  return result;
}

RankOneSum polarize_product(const std::vector<Eigen::VectorXd>& ws) {
  const int p = static_cast<int>(ws.size());
  if (p < 1) throw std::domain_error("polarize_product: empty factor list");
  const int d = static_cast<int>(ws[0].size());
  for (const auto& w : ws)
    if (w.size() != d)
      throw std::domain_error("polarize_product: factor dim mismatch");

  double p_factorial = 1.0;
  for (int q = 2; q <= p; ++q) p_factorial *= q;
  const double denom = p_factorial * std::ldexp(1.0, p);  // p! * 2^p

  RankOneSum out(p, d);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    int sign = 1;
    for (int q = 0; q < p; ++q) {
      if (mask & (std::uint64_t{1} << q)) {
        sum += ws[q];
      } else {
        sum -= ws[q];
        sign = -sign;
      }
    }
    out.add_term(sign / denom, sum);
  }
  return out;
}

DenseTensor::DenseTensor(int order, int dim) : order_(order), dim_(dim) {
  if (order < 1) throw std::invalid_argument("tensor order must be >= 1");
  if (dim < 1) throw std::invalid_argument("tensor dim must be >= 1");
  std::size_t count = 1;
  for (int q = 0; q < order; ++q) {
    if (count > kMaxEntries / static_cast<std::size_t>(dim))
      throw std::invalid_argument("dense tensor would exceed the entry cap");
    count *= static_cast<std::size_t>(dim);
  }
  entries_.assign(count, 0.0);
}

std::size_t DenseTensor::flat_index(const std::vector<int>& index) const {
  if (static_cast<int>(index.size()) != order_)
    throw std::invalid_argument("dense tensor index has wrong length");
  std::size_t flat = 0;
  for (int i : index) {
    if (i < 0 || i >= dim_)
      throw std::out_of_range("dense tensor index out of range");
    flat = flat * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return flat;
}

double& DenseTensor::at(const std::vector<int>& index) {
  return entries_[flat_index(index)];
}

double DenseTensor::at(const std::vector<int>& index) const {
  return entries_[flat_index(index)];
}

DenseTensor DenseTensor::from_rank_one_sum(const RankOneSum& t) {
  DenseTensor dense(t.order(), t.dim());
  const int p = t.order();
  const int d = t.dim();
  std::vector<int> index(static_cast<std::size_t>(p), 0);
  for (std::size_t flat = 0; flat < dense.entries_.size(); ++flat) {
    double value = 0.0;
    for (const auto& term : t.terms()) {
      double prod = term.coef;
      for (int q = 0; q < p; ++q) prod *= term.vec[index[q]];
      value += prod;
    }
    dense.entries_[flat] = value;
    // Advance the multi-index odometer (last digit fastest).
    for (int q = p - 1; q >= 0; --q) {
      if (++index[q] < d) break;
      index[q] = 0;
    }
  }
  return dense;
}

double DenseTensor::contract(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw std::domain_error("contract: dim mismatch");
  std::vector<int> index(static_cast<std::size_t>(order_), 0);
  double out = 0.0;
  for (std::size_t flat = 0; flat < entries_.size(); ++flat) {
    double prod = entries_[flat];
    for (int q = 0; q < order_; ++q) prod *= x[index[q]];
    out += prod;
    for (int q = order_ - 1; q >= 0; --q) {
      if (++index[q] < dim_) break;
      index[q] = 0;
    }
  }
  return out;
}

bool DenseTensor::is_symmetric(int checks, double tol, std::uint64_t seed) const {
  if (order_ == 1) return true;
  Rng rng(seed);
  std::vector<int> index(static_cast<std::size_t>(order_));
  for (int c = 0; c < checks; ++c) {
    for (int q = 0; q < order_; ++q)
      index[q] = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(dim_)));
    std::vector<int> permuted = index;
    rng.shuffle(permuted);
    double a = at(index);
    double b = at(permuted);
    if (std::abs(a - b) > tol * std::max({1.0, std::abs(a), std::abs(b)}))
      return false;
  }
  return true;
}

RankOneSum decompose_symmetric(const DenseTensor& dense) {
  if (!dense.is_symmetric())
    throw std::invalid_argument("decompose_symmetric: tensor is not symmetric");
  const int p = dense.order();
  const int d = dense.dim();
  RankOneSum out(p, d);

  // One slice per (p-1)-prefix; the slice over the last index is the
  // final product factor, the prefix contributes basis-vector factors.
  std::vector<int> prefix(static_cast<std::size_t>(p - 1), 0);
  std::size_t prefix_count = 1;
  for (int q = 0; q < p - 1; ++q) prefix_count *= static_cast<std::size_t>(d);

  std::vector<int> full(static_cast<std::size_t>(p), 0);
  for (std::size_t s = 0; s < prefix_count; ++s) {
    Eigen::VectorXd slice(d);
    for (int q = 0; q < p - 1; ++q) full[q] = prefix[q];
    for (int j = 0; j < d; ++j) {
      full[p - 1] = j;
      slice[j] = dense.at(full);
    }
    if (slice.norm() > 0.0) {
      std::vector<Eigen::VectorXd> factors;
      factors.reserve(static_cast<std::size_t>(p));
      for (int q = 0; q < p - 1; ++q)
        factors.push_back(Eigen::VectorXd::Unit(d, prefix[q]));
      factors.push_back(slice);
      out.append(polarize_product(factors));
    }
    for (int q = p - 2; q >= 0; --q) {
      if (++prefix[q] < d) break;
      prefix[q] = 0;
    }
  }
  return out;
}

}  // namespace twolip
