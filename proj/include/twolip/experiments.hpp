#pragma once

#include "twolip/dataset.hpp"
#include "twolip/training.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace twolip {

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
  int point_count = 0;
};

/// Ordinary least squares y = slope*x + intercept plus Pearson correlation.
/// Refuses fewer than 3 points or zero x-variance.
TrendFit linear_fit(const std::vector<std::pair<double, double>>& points);

/// Grid sweep description shared by the experiment drivers. Every run's
/// seeds derive from (base_seed, n, d, k, repetition), so any cell can be
/// reproduced in isolation and thread count never changes results.
struct SweepSpec {
  std::vector<std::array<int, 3>> grid;  // rows (n, d, k)
  int seeds_per_cell = 3;
  double fit_eps = 0.02;
  int probes = 1000;
  std::uint64_t base_seed = 1;
  DataModel model = DataModel::Gaussian;
  double lr = 1e-3;
  int epochs = 2000;
  int batch_size = 0;  // 0 means min(n, 128)
  int eval_every = 5;
  int threads = 1;

  void validate() const;
};

/// Roughly geometric ladder of `count` widths from 10 to n (deduplicated).
std::vector<int> geometric_k_values(int n, int count = 6);

struct Exp1Row {
  int n = 0, d = 0, k = 0;
  std::uint64_t seed = 0;  // run seed (derived)
  double sqrt_n_over_k = 0.0;
  double max_grad = 0.0;
  bool memorized = false;
  int epochs_used = 0;
};

struct Exp1Result {
  std::vector<Exp1Row> rows;
  std::optional<TrendFit> fit;  // max_grad vs sqrt(n/k) on memorized rows
  std::string diagnostic;       // set when the fit is refused
};

/// Train on every (n, d, k, repetition), probe gradients, and fit the trend
/// of max gradient against sqrt(n/k) over the memorized runs only; rows for
/// non-memorized runs are still emitted.
Exp1Result run_experiment1(const SweepSpec& spec);

struct Exp2Row {
  char branch = 'A';  // A: k = n. B: k = ceil(10 n / d).
  int n = 0, d = 0, k = 0;
  std::uint64_t seed = 0;
  double sqrt_d = 0.0;
  double max_grad = 0.0;
  bool memorized = false;
  int epochs_used = 0;
};

struct Exp2Result {
  std::vector<Exp2Row> rows;
  std::optional<TrendFit> fit_a, fit_b;  // max_grad vs sqrt(d) per branch
  std::string diagnostic_a, diagnostic_b;
};

/// Two-branch width sweep over the distinct (n, d) pairs of the grid (the
/// grid's k column is ignored): branch A trains at k = n, branch B at
/// k = ceil(10 n / d).
Exp2Result run_experiment2(const SweepSpec& spec);

struct ConstructionRow {
  int n = 0, d = 0, k = 0;
  std::uint64_t seed = 0;
  bool constructed = false;
  bool exact_fit = false;
  double max_grad = 0.0;
  double pairwise_lb = 0.0;
  double envelope = 0.0;       // n * log(d) / k
  double sqrt_n_over_k = 0.0;
  std::string error;           // construction failure message, if any
};

/// Builds grouped-cap interpolants across the grid and measures their
/// gradient witnesses; construction failures become rows, not errors.
std::vector<ConstructionRow> run_construction_sweep(const SweepSpec& spec);

/// Desk-scale defaults for the two experiment drivers.
SweepSpec default_experiment1_spec();
SweepSpec default_experiment2_spec();

}  // namespace twolip
