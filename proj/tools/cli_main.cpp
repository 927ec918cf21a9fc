#include "twolip/bounds.hpp"
#include "twolip/constructors.hpp"
#include "twolip/csv.hpp"
#include "twolip/dataset.hpp"
#include "twolip/errors.hpp"
#include "twolip/experiments.hpp"
#include "twolip/network.hpp"
#include "twolip/serialize.hpp"
#include "twolip/svg.hpp"
#include "twolip/tensor.hpp"
#include "twolip/training.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

using namespace twolip;

namespace {

// ---------------------------------------------------------------- helpers

std::vector<std::array<int, 3>> parse_grid(const std::string& text) {
  std::vector<std::array<int, 3>> grid;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(';', pos);
    std::string cell = text.substr(pos, end == std::string::npos ? end : end - pos);
    if (!cell.empty()) {
      std::array<int, 3> row{};
      int field = 0;
      std::size_t p = 0;
      while (field < 3) {
        std::size_t comma = cell.find(',', p);
        std::string tok = cell.substr(p, comma == std::string::npos ? comma : comma - p);
        try {
          row[field] = std::stoi(tok);
        } catch (const std::exception&) {
          throw std::invalid_argument("grid: cannot parse '" + tok + "' in cell '" +
                                      cell + "'");
        }
        ++field;
        if (comma == std::string::npos) break;
        p = comma + 1;
      }
      if (field != 3)
        throw std::invalid_argument("grid: cell '" + cell + "' needs n,d,k");
      grid.push_back(row);
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  if (grid.empty()) throw std::invalid_argument("grid: no cells in '" + text + "'");
  return grid;
}

int activation_degree(const Activation& act) {
  switch (act.kind) {
    case Activation::Kind::ReLU:
      return 1;
    case Activation::Kind::Power:
      return act.power;
    case Activation::Kind::Poly:
      return static_cast<int>(act.coeffs.size()) - 1;
  }
  return 0;
}

std::string bool_cell(bool b) { return b ? "1" : "0"; }

void echo_sweep_config(CsvTable& table, const SweepSpec& spec) {
  table.add_comment("cfg.seeds_per_cell", std::to_string(spec.seeds_per_cell));
  table.add_comment("cfg.fit_eps", format_double(spec.fit_eps));
  table.add_comment("cfg.probes", std::to_string(spec.probes));
  table.add_comment("cfg.base_seed", format_u64(spec.base_seed));
  table.add_comment("cfg.model", to_string(spec.model));
  table.add_comment("cfg.lr", format_double(spec.lr));
  table.add_comment("cfg.epochs", std::to_string(spec.epochs));
  table.add_comment("cfg.batch_size", std::to_string(spec.batch_size));
  table.add_comment("cfg.eval_every", std::to_string(spec.eval_every));
  table.add_comment("cfg.threads", std::to_string(spec.threads));
  std::string cells;
  for (const auto& [n, d, k] : spec.grid) {
    if (!cells.empty()) cells += ';';
    cells += std::to_string(n) + "," + std::to_string(d) + "," + std::to_string(k);
  }
  table.add_comment("cfg.grid", cells);
}

void add_fit_comments(CsvTable& table, const std::string& prefix,
                      const std::optional<TrendFit>& fit, const std::string& diagnostic) {
  if (fit) {
    table.add_comment(prefix + "_slope", format_double(fit->slope));
    table.add_comment(prefix + "_intercept", format_double(fit->intercept));
    table.add_comment(prefix + "_pearson_r", format_double(fit->pearson_r));
    table.add_comment(prefix + "_points", std::to_string(fit->point_count));
  } else {
    table.add_comment(prefix + "_refused", diagnostic);
  }
}

// ------------------------------------------------------------ subcommands

struct GenDataArgs {
  int n = 0, d = 0;
  std::string model = "sphere";
  std::uint64_t seed = 0;
  bool balanced = false;
  std::string out;
};

int run_gen_data(const GenDataArgs& a) {
  DatasetConfig cfg;
  cfg.n = a.n;
  cfg.d = a.d;
  cfg.model = data_model_from_string(a.model);
  cfg.seed = a.seed;
  cfg.balanced = a.balanced;
  GenericDataset ds = generate(cfg);
  save_dataset(ds, a.out);
  std::printf("wrote %s: n=%d d=%d model=%s seed=%llu min_dist=%s\n", a.out.c_str(),
              ds.n(), ds.d(), to_string(cfg.model).c_str(),
              static_cast<unsigned long long>(cfg.seed),
              format_double(min_pairwise_distance(ds)).c_str());
  return 0;
}

struct ConstructArgs {
  std::string data;
  std::string kind;
  int k = 0;
  int p = 2;
  double threshold = 0.9;
  double scale = 10.0;
  int retries = 20;
  bool decompose = false;
  int probes = 1000;
  std::uint64_t probe_seed = 0;
  std::string out;
  std::string net_out;
  std::string report_path;
};

int run_construct(const ConstructArgs& a) {
  GenericDataset ds = load_dataset(a.data);

  ConstructionReport report = [&] {
    if (a.kind == "linear") return min_norm_linear(ds);
    if (a.kind == "caps") return cap_network(ds, a.threshold, a.scale);
    if (a.kind == "grouped") {
      if (a.k < 1) throw std::invalid_argument("construct: grouped needs --k >= 1");
      return grouped_cap_network(ds, a.k, a.retries);
    }
    if (a.kind == "tensor") return tensor_network(ds, a.p, a.decompose);
    throw std::invalid_argument("construct: unknown kind '" + a.kind + "'");
  }();

  // Measured witnesses for the constructed interpolant.
  double max_grad = max_random_gradient(
      [&](const Eigen::VectorXd& x) { return report.eval_gradient(x); }, ds.d(),
      a.probes, ds.config.model, a.probe_seed);
  double pairwise = pairwise_slope_lb(
      [&](const Eigen::VectorXd& x) { return report.eval(x); }, ds);
  std::optional<double> proxy;
  int model_k = 0;
  if (const auto* net = std::get_if<TwoLayerNet>(&report.model)) {
    model_k = static_cast<int>(net->w.rows());
    proxy = lipschitz_report(*net, ds, a.probes, a.probe_seed).spectral_proxy;
  } else {
    model_k = static_cast<int>(std::get<RankOneSum>(report.model).term_count());
  }

  if (!a.out.empty()) {
    if (const auto* net = std::get_if<TwoLayerNet>(&report.model))
      save_network(*net, a.out);
    else
      save_tensor(std::get<RankOneSum>(report.model), a.out);
  }
  if (!a.net_out.empty()) {
    if (!report.neuron_form)
      throw std::invalid_argument(
          "construct: --net-out needs the tensor kind with --decompose");
    save_network(*report.neuron_form, a.net_out);
  }

  if (!a.report_path.empty()) {
    CsvTable table;
    table.add_comment("schema", "twolip.construct.v1");
    table.add_comment("cfg.data", a.data);
    table.add_comment("cfg.kind", a.kind);
    table.add_comment("cfg.probes", std::to_string(a.probes));
    table.add_comment("cfg.probe_seed", format_u64(a.probe_seed));
    if (a.kind == "grouped") table.add_comment("cfg.retries", std::to_string(a.retries));
    if (a.kind == "caps") {
      table.add_comment("cfg.threshold", format_double(a.threshold));
      table.add_comment("cfg.scale", format_double(a.scale));
    }
    if (a.kind == "tensor") {
      table.add_comment("cfg.p", std::to_string(a.p));
      table.add_comment("cfg.decompose", bool_cell(a.decompose));
    }
    table.columns = {"kind", "n", "d", "k", "exact_fit", "max_residual", "retries",
                     "max_random_gradient", "pairwise_slope_lb", "spectral_proxy"};
    table.rows.push_back(
        {a.kind, std::to_string(ds.n()), std::to_string(ds.d()),
         std::to_string(model_k), bool_cell(report.exact_fit),
         format_double(report.max_residual),
         std::to_string(report.validation.retries_used), format_double(max_grad),
         format_double(pairwise), proxy ? format_double(*proxy) : std::string()});
    table.write(a.report_path);
  }

  std::printf("constructed %s: k=%d exact_fit=%d max_residual=%s max_grad=%s\n",
              a.kind.c_str(), model_k, report.exact_fit ? 1 : 0,
              format_double(report.max_residual).c_str(),
              format_double(max_grad).c_str());
  return 0;
}

struct TrainArgs {
  std::string data;
  TrainConfig cfg;
  std::string norm = "batchnorm";
  std::string out;
  std::string log_path;
};

void write_train_log(const std::string& path, const TrainConfig& cfg,
                     const std::string& data_path, const std::string& norm,
                     const std::vector<TraceEntry>& trace,
                     const std::string& diverged_message) {
  CsvTable table;
  table.add_comment("schema", "twolip.trainlog.v1");
  table.add_comment("cfg.data", data_path);
  table.add_comment("cfg.k", std::to_string(cfg.k));
  table.add_comment("cfg.lr", format_double(cfg.lr));
  table.add_comment("cfg.epochs", std::to_string(cfg.epochs));
  table.add_comment("cfg.batch_size", std::to_string(cfg.batch_size));
  table.add_comment("cfg.seed", format_u64(cfg.seed));
  table.add_comment("cfg.norm", norm);
  table.add_comment("cfg.fit_eps", format_double(cfg.fit_eps));
  table.add_comment("cfg.eval_every", std::to_string(cfg.eval_every));
  if (!diverged_message.empty()) table.add_comment("diverged", diverged_message);
  table.columns = {"epoch", "mse", "sign_errors"};
  for (const auto& entry : trace)
    table.rows.push_back({std::to_string(entry.epoch), format_double(entry.mse),
                          std::to_string(entry.sign_errors)});
  table.write(path);
}

int run_train(TrainArgs& a) {
  GenericDataset ds = load_dataset(a.data);
  a.cfg.norm_mode = a.norm == "none" ? NormMode::None : NormMode::BatchNorm;

  TrainResult result;
  try {
    result = train(ds, a.cfg);
  } catch (const TrainingDiverged& e) {
    if (!a.log_path.empty()) {
      std::vector<TraceEntry> trace;
      for (const auto& [epoch, mse] : e.loss_trace)
        trace.push_back({epoch, mse, -1});  // sign errors unknown at blow-up
      write_train_log(a.log_path, a.cfg, a.data, a.norm, trace, e.what());
    }
    throw;
  }

  if (!a.out.empty()) save_network(result.net, a.out);
  if (!a.log_path.empty())
    write_train_log(a.log_path, a.cfg, a.data, a.norm, result.loss_trace, "");

  std::printf("trained k=%d: memorized=%d final_loss=%s epochs_used=%d\n", a.cfg.k,
              result.memorized ? 1 : 0, format_double(result.final_loss).c_str(),
              result.epochs_used);
  return 0;
}

struct MeasureArgs {
  std::string net_path;
  std::string data;
  int probes = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

int run_measure(const MeasureArgs& a) {
  TwoLayerNet net = load_network(a.net_path);
  GenericDataset ds = load_dataset(a.data);
  LipschitzReport rep = lipschitz_report(net, ds, a.probes, a.seed);

  if (!a.out.empty()) {
    CsvTable table;
    table.add_comment("schema", "twolip.measure.v1");
    table.add_comment("cfg.net", a.net_path);
    table.add_comment("cfg.data", a.data);
    table.add_comment("cfg.probes", std::to_string(a.probes));
    table.add_comment("cfg.seed", format_u64(a.seed));
    table.columns = {"n", "d", "k", "probes", "max_random_gradient",
                     "pairwise_slope_lb", "spectral_proxy"};
    table.rows.push_back({std::to_string(ds.n()), std::to_string(ds.d()),
                          std::to_string(static_cast<int>(net.w.rows())),
                          std::to_string(rep.probe_count),
                          format_double(rep.max_random_gradient),
                          format_double(rep.pairwise_slope_lb),
                          rep.spectral_proxy ? format_double(*rep.spectral_proxy)
                                             : std::string()});
    table.write(a.out);
  }

  std::printf("max_random_gradient=%s pairwise_slope_lb=%s spectral_proxy=%s\n",
              format_double(rep.max_random_gradient).c_str(),
              format_double(rep.pairwise_slope_lb).c_str(),
              rep.spectral_proxy ? format_double(*rep.spectral_proxy).c_str() : "n/a");
  return 0;
}

struct CertifyArgs {
  std::string net_path;
  std::string tensor_path;
  std::string data;
  std::string kind = "auto";
  int rank = 0;
  double fit_tol = 0.1;
  std::string out;
};

int run_certify(const CertifyArgs& a) {
  if (a.net_path.empty() == a.tensor_path.empty())
    throw std::invalid_argument("certify: pass exactly one of --net or --tensor");
  GenericDataset ds = load_dataset(a.data);

  std::optional<TwoLayerNet> net;
  std::optional<RankOneSum> tensor;
  if (!a.net_path.empty()) net = load_network(a.net_path);
  if (!a.tensor_path.empty()) tensor = load_tensor(a.tensor_path);

  std::string kind = a.kind;
  if (kind == "auto") {
    if (tensor)
      kind = (tensor->order() == 2 && a.rank > 0) ? "quadratic" : "tensor";
    else
      kind = net->activation.kind == Activation::Kind::Poly ? "polynomial" : "spectral";
  }

  Certificate cert;
  int p = 0;
  int k = 0;
  if (kind == "spectral") {
    if (!net) throw std::invalid_argument("certify: spectral needs --net");
    cert = spectral_certificate(*net, ds, a.fit_tol);
    p = activation_degree(net->activation);
    k = static_cast<int>(net->w.rows());
  } else if (kind == "tensor") {
    if (!tensor) throw std::invalid_argument("certify: tensor kind needs --tensor");
    cert = tensor_certificate(*tensor, ds);
    p = tensor->order();
    k = static_cast<int>(tensor->term_count());
  } else if (kind == "quadratic") {
    if (!tensor) throw std::invalid_argument("certify: quadratic needs --tensor");
    if (a.rank < 1) throw std::invalid_argument("certify: quadratic needs --rank >= 1");
    cert = quadratic_certificate(*tensor, ds, a.rank);
    p = tensor->order();
    k = a.rank;
  } else if (kind == "polynomial") {
    if (!net) throw std::invalid_argument("certify: polynomial needs --net");
    cert = polynomial_certificate(*net, ds, a.fit_tol);
    p = activation_degree(net->activation);
    k = static_cast<int>(net->w.rows());
  } else {
    throw std::invalid_argument("certify: unknown kind '" + kind + "'");
  }

  const double ratio =
      cert.conjectured_floor > 0.0 ? cert.lower_bound / cert.conjectured_floor : 0.0;

  if (!a.out.empty()) {
    CsvTable table;
    table.add_comment("schema", "twolip.certificate.v1");
    table.add_comment("cfg.data", a.data);
    if (!a.net_path.empty()) table.add_comment("cfg.net", a.net_path);
    if (!a.tensor_path.empty()) table.add_comment("cfg.tensor", a.tensor_path);
    table.add_comment("cfg.kind", kind);
    if (kind == "quadratic") table.add_comment("cfg.rank", std::to_string(a.rank));
    if (kind == "spectral" || kind == "polynomial")
      table.add_comment("cfg.fit_tol", format_double(a.fit_tol));
    for (const auto& note : cert.notes) table.add_comment("note", note);
    table.columns = {"kind", "n",           "d",
                     "k",    "p",           "lower_bound",
                     "conjectured_floor",   "ratio"};
    std::vector<std::string> row = {to_string(cert.kind),
                                    std::to_string(ds.n()),
                                    std::to_string(ds.d()),
                                    std::to_string(k),
                                    std::to_string(p),
                                    format_double(cert.lower_bound),
                                    format_double(cert.conjectured_floor),
                                    format_double(ratio)};
    for (const auto& [name, value] : cert.components) {
      table.columns.push_back(name);
      row.push_back(format_double(value));
    }
    table.rows.push_back(std::move(row));
    table.write(a.out);
  }

  std::printf("%s certificate: lower_bound=%s conjectured_floor=%s ratio=%s\n",
              to_string(cert.kind).c_str(), format_double(cert.lower_bound).c_str(),
              format_double(cert.conjectured_floor).c_str(),
              format_double(ratio).c_str());
  return 0;
}

struct ExpArgs {
  // spec starts as the experiment's built-in defaults; parsed flags
  // overwrite individual fields in place.
  SweepSpec spec;
  std::string grid_text;
  std::string model;
  std::string out;
  std::string svg;
};

void finish_exp_spec(ExpArgs& a) {
  a.spec.model = data_model_from_string(a.model);
  if (!a.grid_text.empty()) a.spec.grid = parse_grid(a.grid_text);
  a.spec.validate();
}

int run_exp1(ExpArgs& a) {
  finish_exp_spec(a);
  Exp1Result res = run_experiment1(a.spec);

  CsvTable table;
  table.add_comment("schema", "twolip.exp1.v1");
  echo_sweep_config(table, a.spec);
  add_fit_comments(table, "fit", res.fit, res.diagnostic);
  table.columns = {"n",       "d",        "k",         "seed",
                   "sqrt_n_over_k", "max_grad", "memorized", "epochs_used"};
  for (const auto& r : res.rows)
    table.rows.push_back({std::to_string(r.n), std::to_string(r.d), std::to_string(r.k),
                          format_u64(r.seed), format_double(r.sqrt_n_over_k),
                          format_double(r.max_grad), bool_cell(r.memorized),
                          std::to_string(r.epochs_used)});
  table.write(a.out);

  if (!a.svg.empty()) {
    ScatterPlot plot;
    plot.title = "max gradient vs sqrt(n/k)";
    plot.x_label = "sqrt(n/k)";
    plot.y_label = "max random gradient";
    ScatterSeries kept;
    kept.label = "memorized";
    kept.color = "#1f77b4";
    for (const auto& r : res.rows)
      if (r.memorized) kept.points.push_back({r.sqrt_n_over_k, r.max_grad});
    if (res.fit) {
      kept.has_line = true;
      kept.line_slope = res.fit->slope;
      kept.line_intercept = res.fit->intercept;
    }
    plot.series.push_back(std::move(kept));
    plot.write(a.svg);
  }

  int memorized = 0;
  for (const auto& r : res.rows) memorized += r.memorized ? 1 : 0;
  if (res.fit)
    std::printf("exp1: %zu rows, %d memorized; slope=%s r=%s\n", res.rows.size(),
                memorized, format_double(res.fit->slope).c_str(),
                format_double(res.fit->pearson_r).c_str());
  else
    std::printf("exp1: %zu rows, %d memorized; fit refused: %s\n", res.rows.size(),
                memorized, res.diagnostic.c_str());
  return 0;
}

int run_exp2(ExpArgs& a) {
  finish_exp_spec(a);
  Exp2Result res = run_experiment2(a.spec);

  CsvTable table;
  table.add_comment("schema", "twolip.exp2.v1");
  echo_sweep_config(table, a.spec);
  add_fit_comments(table, "fit_a", res.fit_a, res.diagnostic_a);
  add_fit_comments(table, "fit_b", res.fit_b, res.diagnostic_b);
  table.columns = {"branch", "n",        "d",         "k",          "seed",
                   "sqrt_d", "max_grad", "memorized", "epochs_used"};
  for (const auto& r : res.rows)
    table.rows.push_back({std::string(1, r.branch), std::to_string(r.n),
                          std::to_string(r.d), std::to_string(r.k), format_u64(r.seed),
                          format_double(r.sqrt_d), format_double(r.max_grad),
                          bool_cell(r.memorized), std::to_string(r.epochs_used)});
  table.write(a.out);

  if (!a.svg.empty()) {
    ScatterPlot plot;
    plot.title = "max gradient vs sqrt(d)";
    plot.x_label = "sqrt(d)";
    plot.y_label = "max random gradient";
    ScatterSeries wide, narrow;
    wide.label = "k = n";
    wide.color = "#1f77b4";
    narrow.label = "k = 10n/d";
    narrow.color = "#d62728";
    for (const auto& r : res.rows) {
      if (!r.memorized) continue;
      (r.branch == 'A' ? wide : narrow).points.push_back({r.sqrt_d, r.max_grad});
    }
    if (res.fit_a) {
      wide.has_line = true;
      wide.line_slope = res.fit_a->slope;
      wide.line_intercept = res.fit_a->intercept;
    }
    if (res.fit_b) {
      narrow.has_line = true;
      narrow.line_slope = res.fit_b->slope;
      narrow.line_intercept = res.fit_b->intercept;
    }
    plot.series = {wide, narrow};
    plot.write(a.svg);
  }

  auto describe = [](const std::optional<TrendFit>& fit, const std::string& diag) {
    return fit ? "slope=" + format_double(fit->slope) +
                     " r=" + format_double(fit->pearson_r)
               : "refused: " + diag;
  };
  std::printf("exp2: %zu rows; k=n %s; k=10n/d %s\n", res.rows.size(),
              describe(res.fit_a, res.diagnostic_a).c_str(),
              describe(res.fit_b, res.diagnostic_b).c_str());
  return 0;
}

int run_sweep_construct(ExpArgs& a) {
  finish_exp_spec(a);
  auto rows = run_construction_sweep(a.spec);

  CsvTable table;
  table.add_comment("schema", "twolip.sweepconstruct.v1");
  echo_sweep_config(table, a.spec);
  table.columns = {"n",        "d",           "k",        "seed",
                   "constructed", "exact_fit", "max_grad", "pairwise_lb",
                   "envelope", "sqrt_n_over_k", "error"};
  for (const auto& r : rows)
    table.rows.push_back({std::to_string(r.n), std::to_string(r.d), std::to_string(r.k),
                          format_u64(r.seed), bool_cell(r.constructed),
                          bool_cell(r.exact_fit), format_double(r.max_grad),
                          format_double(r.pairwise_lb), format_double(r.envelope),
                          format_double(r.sqrt_n_over_k), r.error});
  table.write(a.out);

  if (!a.svg.empty()) {
    ScatterPlot plot;
    plot.title = "grouped caps: measured gradient vs sqrt(n/k)";
    plot.x_label = "sqrt(n/k)";
    plot.y_label = "witness";
    ScatterSeries grad, envelope;
    grad.label = "max random gradient";
    grad.color = "#1f77b4";
    envelope.label = "n log(d)/k";
    envelope.color = "#2ca02c";
    for (const auto& r : rows) {
      if (!r.constructed) continue;
      grad.points.push_back({r.sqrt_n_over_k, r.max_grad});
      envelope.points.push_back({r.sqrt_n_over_k, r.envelope});
    }
    plot.series = {grad, envelope};
    plot.write(a.svg);
  }

  int constructed = 0;
  for (const auto& r : rows) constructed += r.constructed ? 1 : 0;
  std::printf("sweep-construct: %zu rows, %d constructed\n", rows.size(), constructed);
  return 0;
}

struct ReportArgs {
  std::string in;
  std::string kind = "auto";
  std::string out;
  std::string svg;
};

int run_report(const ReportArgs& a) {
  CsvTable table = CsvTable::read(a.in);
  std::string kind = a.kind;
  if (kind == "auto") {
    auto has = [&](const char* name) {
      return std::find(table.columns.begin(), table.columns.end(), name) !=
             table.columns.end();
    };
    if (has("branch"))
      kind = "exp2";
    else if (has("constructed"))
      kind = "sweep";
    else if (has("sqrt_n_over_k"))
      kind = "exp1";
    else
      throw std::invalid_argument("report: cannot infer table kind from columns");
  }

  CsvTable summary;
  summary.add_comment("schema", "twolip.report.v1");
  summary.add_comment("cfg.in", a.in);
  summary.add_comment("cfg.kind", kind);
  summary.columns = {"series", "slope", "intercept", "pearson_r", "points"};

  ScatterPlot plot;
  plot.y_label = "max random gradient";

  auto fit_series = [&](const std::string& label, const std::string& color,
                        std::vector<std::pair<double, double>> points) {
    ScatterSeries series;
    series.label = label;
    series.color = color;
    series.points = points;
    try {
      TrendFit fit = linear_fit(points);
      series.has_line = true;
      series.line_slope = fit.slope;
      series.line_intercept = fit.intercept;
      summary.rows.push_back({label, format_double(fit.slope),
                              format_double(fit.intercept),
                              format_double(fit.pearson_r),
                              std::to_string(fit.point_count)});
    } catch (const std::invalid_argument& e) {
      summary.rows.push_back({label, "", "", "", std::to_string(points.size())});
      summary.add_comment("refused." + label, e.what());
    }
    plot.series.push_back(std::move(series));
  };

  if (kind == "exp1") {
    plot.title = "max gradient vs sqrt(n/k)";
    plot.x_label = "sqrt(n/k)";
    std::size_t cx = table.column_index("sqrt_n_over_k");
    std::size_t cy = table.column_index("max_grad");
    std::size_t cm = table.column_index("memorized");
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : table.rows)
      if (row[cm] == "1") pts.push_back({std::stod(row[cx]), std::stod(row[cy])});
    fit_series("memorized", "#1f77b4", std::move(pts));
  } else if (kind == "exp2") {
    plot.title = "max gradient vs sqrt(d)";
    plot.x_label = "sqrt(d)";
    std::size_t cb = table.column_index("branch");
    std::size_t cx = table.column_index("sqrt_d");
    std::size_t cy = table.column_index("max_grad");
    std::size_t cm = table.column_index("memorized");
    std::vector<std::pair<double, double>> pts_a, pts_b;
    for (const auto& row : table.rows) {
      if (row[cm] != "1") continue;
      auto& pts = row[cb] == "A" ? pts_a : pts_b;
      pts.push_back({std::stod(row[cx]), std::stod(row[cy])});
    }
    fit_series("k = n", "#1f77b4", std::move(pts_a));
    fit_series("k = 10n/d", "#d62728", std::move(pts_b));
  } else if (kind == "sweep") {
    plot.title = "grouped caps: measured gradient vs sqrt(n/k)";
    plot.x_label = "sqrt(n/k)";
    std::size_t cx = table.column_index("sqrt_n_over_k");
    std::size_t cy = table.column_index("max_grad");
    std::size_t cc = table.column_index("constructed");
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : table.rows)
      if (row[cc] == "1") pts.push_back({std::stod(row[cx]), std::stod(row[cy])});
    fit_series("constructed", "#1f77b4", std::move(pts));
  } else {
    throw std::invalid_argument("report: unknown kind '" + kind + "'");
  }

  if (!a.out.empty()) summary.write(a.out);
  if (!a.svg.empty()) plot.write(a.svg);

  for (const auto& row : summary.rows)
    std::printf("%s: slope=%s r=%s points=%s\n", row[0].c_str(),
                row[1].empty() ? "n/a" : row[1].c_str(),
                row[3].empty() ? "n/a" : row[3].c_str(), row[4].c_str());
  return 0;
}

void add_sweep_options(CLI::App* cmd, ExpArgs& args, bool training) {
  cmd->add_option("--grid", args.grid_text,
                  "Cells 'n,d,k' separated by ';' (default: built-in grid)");
  cmd->add_option("--seeds", args.spec.seeds_per_cell, "Repetitions per cell");
  cmd->add_option("--probes", args.spec.probes, "Gradient probe count");
  cmd->add_option("--base-seed", args.spec.base_seed, "Root seed for the sweep");
  cmd->add_option("--threads", args.spec.threads, "Worker threads (0 = hardware)");
  cmd->add_option("--model", args.model, "Point distribution: sphere|gaussian");
  if (training) {
    cmd->add_option("--fit-eps", args.spec.fit_eps, "Memorization loss threshold");
    cmd->add_option("--lr", args.spec.lr, "Learning rate");
    cmd->add_option("--epochs", args.spec.epochs, "Epoch budget per run");
    cmd->add_option("--batch-size", args.spec.batch_size, "Batch size (0 = min(n,128))");
    cmd->add_option("--eval-every", args.spec.eval_every, "Epochs between checks");
  }
  cmd->add_option("--out", args.out, "Rows CSV path")->required();
  cmd->add_option("--svg", args.svg, "Optional scatter SVG path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Smooth interpolation constructions, memorization training, and "
      "Lipschitz measurement for two-layer networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value config file with [subcommand] sections");

  GenDataArgs gen_args;
  auto* gen = app.add_subcommand("gen-data", "Draw a random dataset and save it");
  gen->add_option("--n", gen_args.n, "Point count")->required();
  gen->add_option("--d", gen_args.d, "Ambient dimension")->required();
  gen->add_option("--model", gen_args.model, "sphere|gaussian");
  gen->add_option("--seed", gen_args.seed, "Stream seed");
  gen->add_flag("--balanced", gen_args.balanced, "Exactly n/2 labels of each sign");
  gen->add_option("--out", gen_args.out, "Output dataset file")->required();

  ConstructArgs con_args;
  auto* con = app.add_subcommand("construct", "Build an explicit interpolating model");
  con->add_option("--data", con_args.data, "Dataset file")->required();
  con->add_option("--kind", con_args.kind, "linear|caps|grouped|tensor")->required();
  con->add_option("--k", con_args.k, "Neuron budget (grouped)");
  con->add_option("--p", con_args.p, "Tensor order (tensor, even)");
  con->add_option("--threshold", con_args.threshold, "Cap threshold (caps)");
  con->add_option("--scale", con_args.scale, "Cap output scale (caps)");
  con->add_option("--retries", con_args.retries, "Margin reshuffle budget (grouped)");
  con->add_flag("--decompose", con_args.decompose, "Also build the neuron form (tensor)");
  con->add_option("--probes", con_args.probes, "Gradient probe count");
  con->add_option("--probe-seed", con_args.probe_seed, "Probe stream seed");
  con->add_option("--out", con_args.out, "Model output file (net or tensor)");
  con->add_option("--net-out", con_args.net_out, "Neuron-form output (tensor --decompose)");
  con->add_option("--report", con_args.report_path, "Construction report CSV");

  TrainArgs train_args;
  auto* tr = app.add_subcommand("train", "Fit random labels from scratch");
  tr->add_option("--data", train_args.data, "Dataset file")->required();
  tr->add_option("--k", train_args.cfg.k, "Hidden width")->required();
  tr->add_option("--epochs", train_args.cfg.epochs, "Epoch budget");
  tr->add_option("--lr", train_args.cfg.lr, "Learning rate");
  tr->add_option("--seed", train_args.cfg.seed, "Init and batch-order seed");
  tr->add_option("--batch-size", train_args.cfg.batch_size, "Batch size (0 = min(n,128))");
  tr->add_option("--fit-eps", train_args.cfg.fit_eps, "Memorization loss threshold");
  tr->add_option("--eval-every", train_args.cfg.eval_every, "Epochs between checks");
  tr->add_option("--norm", train_args.norm, "batchnorm|none");
  tr->add_option("--out", train_args.out, "Trained network file");
  tr->add_option("--log", train_args.log_path, "Loss trace CSV");

  MeasureArgs meas_args;
  auto* meas = app.add_subcommand("measure", "Lipschitz witnesses for a saved network");
  meas->add_option("--net", meas_args.net_path, "Network file")->required();
  meas->add_option("--data", meas_args.data, "Dataset file")->required();
  meas->add_option("--probes", meas_args.probes, "Gradient probe count");
  meas->add_option("--seed", meas_args.seed, "Probe stream seed");
  meas->add_option("--out", meas_args.out, "Witness CSV");

  CertifyArgs cert_args;
  auto* cert = app.add_subcommand("certify", "Lower-bound certificate for a model");
  cert->add_option("--net", cert_args.net_path, "Network file");
  cert->add_option("--tensor", cert_args.tensor_path, "Tensor file");
  cert->add_option("--data", cert_args.data, "Dataset file")->required();
  cert->add_option("--kind", cert_args.kind,
                   "auto|spectral|tensor|quadratic|polynomial");
  cert->add_option("--rank", cert_args.rank, "Rank budget (quadratic)");
  cert->add_option("--fit-tol", cert_args.fit_tol, "Residual gate (spectral/polynomial)");
  cert->add_option("--out", cert_args.out, "Certificate CSV");

  ExpArgs exp1_args;
  exp1_args.spec = default_experiment1_spec();
  exp1_args.model = "gaussian";
  auto* exp1 = app.add_subcommand(
      "exp1", "Train across a width grid and fit max gradient vs sqrt(n/k)");
  add_sweep_options(exp1, exp1_args, true);

  ExpArgs exp2_args;
  exp2_args.spec = default_experiment2_spec();
  exp2_args.model = "gaussian";
  auto* exp2 = app.add_subcommand(
      "exp2", "Matched vs narrow widths across dimensions; fits vs sqrt(d)");
  add_sweep_options(exp2, exp2_args, true);

  ExpArgs sweep_args;
  sweep_args.spec.grid = {{800, 400, 100}, {800, 400, 200}, {800, 400, 400}, {800, 400, 800}};
  sweep_args.model = "sphere";
  auto* sweep = app.add_subcommand(
      "sweep-construct", "Grouped-cap constructions across a grid with witnesses");
  add_sweep_options(sweep, sweep_args, false);

  ReportArgs report_args;
  auto* rep = app.add_subcommand("report", "Refit trends from a rows CSV and plot");
  rep->add_option("--in", report_args.in, "Rows CSV from exp1/exp2/sweep-construct")
      ->required();
  rep->add_option("--kind", report_args.kind, "auto|exp1|exp2|sweep");
  rep->add_option("--out", report_args.out, "Summary CSV");
  rep->add_option("--svg", report_args.svg, "Scatter SVG");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen_data(gen_args);
    if (*con) return run_construct(con_args);
    if (*tr) return run_train(train_args);
    if (*meas) return run_measure(meas_args);
    if (*cert) return run_certify(cert_args);
    if (*exp1) return run_exp1(exp1_args);
    if (*exp2) return run_exp2(exp2_args);
    if (*sweep) return run_sweep_construct(sweep_args);
    if (*rep) return run_report(report_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
