// Command-line front end: penalty selection by rolling cross validation,
// fixed-lambda estimation, forecasting, simulation, impulse responses,
// information-criterion benchmarks, and post-selection refitting.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sparsevar/sparsevar.hpp"

namespace sv = sparsevar;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

ordered_json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) sv::fail_data("io", "cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    sv::fail_data("io", std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return j;
}

void save_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) sv::fail_data("io", "cannot write " + path);
  out << j.dump(2) << '\n';
}

void check_format_version(const ordered_json& j, const std::string& path) {
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kFormatVersion)
    sv::fail_data("io", path + " has a missing or unsupported format_version");
}

ordered_json matrix_to_json(const sv::Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

sv::Matrix matrix_from_json(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    sv::fail_data("io", what + " must be an array of numeric rows");
  sv::Matrix m(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) sv::fail_data("io", what + " has ragged rows");
    for (std::size_t c = 0; c < j[i].size(); ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

std::vector<double> vector_from_json(const ordered_json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

// ---------------------------------------------------------------------------
// Config and data ingestion
// ---------------------------------------------------------------------------

struct LoadedData {
  sv::SeriesMatrix series;                 // standardized when requested
  std::optional<sv::Scaling> scaling;      // present when standardized
  std::vector<std::string> labels;
};

struct CliConfig {
  sv::ModelSpec spec;
  bool standardize = true;
};

CliConfig parse_config(const std::string& path) {
  ordered_json j = load_json(path);
  check_format_version(j, path);
  CliConfig cfg;
  sv::ModelSpec& spec = cfg.spec;
  if (!j.contains("k") || !j.contains("p"))
    sv::fail_data("io", "config must provide k (endogenous count) and p (max lag)");
  spec.k = j["k"].get<int>();
  spec.p = j["p"].get<int>();
  spec.s = j.value("s", 0);
  spec.penalty.kind = sv::penalty_from_name(j.value("struct", std::string("Basic")));
  if (j.contains("gran")) {
    const auto& g = j["gran"];
    if (g.is_array() && g.size() == 2) {
      spec.grid_depth = g[0].get<double>();
      spec.n_lambda = g[1].get<int>();
    } else if (g.is_object()) {
      spec.grid_depth = g.value("depth", 50.0);
      spec.n_lambda = g.value("n_lambda", 10);
    } else {
      sv::fail_data("io", "gran must be [depth, n_lambda] or an object");
    }
  }
  spec.own_lambdas = j.value("own_lambdas", false);
  if (j.contains("lambdas")) spec.lambdas = vector_from_json(j["lambdas"]);
  spec.h = j.value("h", 1);
  spec.recursive = j.value("recursive", false);
  spec.mn = j.value("mn", false);
  if (j.contains("c")) spec.c = vector_from_json(j["c"]);
  if (j.contains("alpha")) {
    if (j["alpha"].is_array())
      spec.alpha_grid = vector_from_json(j["alpha"]);
    else
      spec.alpha_grid = {j["alpha"].get<double>()};
  }
  if (j.contains("gamma")) spec.penalty.gamma = j["gamma"].get<double>();
  spec.t1 = j.value("t1", 0);
  spec.t2 = j.value("t2", 0);
  spec.one_se = j.value("one_se", false);
  spec.ic_benchmarks = j.value("ic", true);
  const std::string rvar = j.value("rvar", std::string("none"));
  if (rvar == "none")
    spec.rvar = sv::RefitMode::none;
  else if (rvar == "rls")
    spec.rvar = sv::RefitMode::rls;
  else if (rvar == "wls")
    spec.rvar = sv::RefitMode::wls;
  else if (rvar == "ifgls")
    spec.rvar = sv::RefitMode::ifgls;
  else
    sv::fail_data("io", "rvar must be one of none/rls/wls/ifgls");
  cfg.standardize = j.value("standardize", true);
  return cfg;
}

LoadedData load_data(const std::string& path, int k, bool standardize) {
  sv::CsvTable table = sv::read_csv(path);
  LoadedData out;
  out.series.values = table.values;
  out.series.k = k;
  out.series.m = static_cast<int>(table.values.cols()) - k;
  out.series.labels = table.header;
  out.labels = table.header;
  out.series.validate();
  if (standardize) {
    auto [scaled, sc] = sv::standardize(out.series);
    out.series = scaled;
    out.scaling = sc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

struct StoredModel {
  sv::CoefficientSet fit;
  std::optional<sv::Scaling> scaling;
  std::vector<std::string> labels;
  sv::Matrix history_tail;  // standardized scale, last max(p, s, 1) rows
  sv::Matrix sigma_u;       // residual covariance of the stored fit
  std::string structure;
};

ordered_json scaling_to_json(const std::optional<sv::Scaling>& sc) {
  if (!sc) return nullptr;
  ordered_json j;
  j["mean"] = std::vector<double>(sc->mean.begin(), sc->mean.end());
  j["sd"] = std::vector<double>(sc->sd.begin(), sc->sd.end());
  return j;
}

void write_model(const std::string& path, const sv::CoefficientSet& fit,
                 const LoadedData& data, const std::string& structure,
                 const sv::Matrix& sigma_u) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["struct"] = structure;
  j["k"] = fit.k;
  j["m"] = fit.m;
  j["p"] = fit.p;
  j["s"] = fit.s;
  j["h"] = fit.h;
  j["direct"] = fit.direct;
  j["lambda"] = fit.lambda;
  j["alpha"] = fit.alpha;
  j["gamma"] = fit.gamma;
  j["labels"] = data.labels;
  j["coefficients"] = matrix_to_json(fit.b);
  j["scaling"] = scaling_to_json(data.scaling);
  const int tail = std::max({fit.p, fit.s, 1});
  j["history_tail"] = matrix_to_json(data.series.values.bottomRows(tail));
  j["sigma_u"] = matrix_to_json(sigma_u);
  save_json(path, j);
}

StoredModel read_model(const std::string& path) {
  ordered_json j = load_json(path);
  check_format_version(j, path);
  StoredModel model;
  model.structure = j.value("struct", std::string("Basic"));
  model.fit.k = j["k"].get<int>();
  model.fit.m = j["m"].get<int>();
  model.fit.p = j["p"].get<int>();
  model.fit.s = j["s"].get<int>();
  model.fit.h = j.value("h", 1);
  model.fit.direct = j.value("direct", false);
  model.fit.lambda = j.value("lambda", 0.0);
  model.fit.alpha = j.value("alpha", 0.0);
  model.fit.gamma = j.value("gamma", 0.0);
  model.fit.b = matrix_from_json(j["coefficients"], "coefficients");
  model.fit.validate();
  if (j.contains("labels")) model.labels = j["labels"].get<std::vector<std::string>>();
  if (j.contains("scaling") && !j["scaling"].is_null()) {
    sv::Scaling sc;
    std::vector<double> mean = vector_from_json(j["scaling"]["mean"]);
    std::vector<double> sd = vector_from_json(j["scaling"]["sd"]);
    sc.mean = Eigen::Map<sv::Vector>(mean.data(), mean.size());
    sc.sd = Eigen::Map<sv::Vector>(sd.data(), sd.size());
    model.scaling = sc;
  }
  if (j.contains("history_tail"))
    model.history_tail = matrix_from_json(j["history_tail"], "history_tail");
  if (j.contains("sigma_u")) model.sigma_u = matrix_from_json(j["sigma_u"], "sigma_u");
  return model;
}

std::vector<std::string> coefficient_header(const sv::CoefficientSet& fit,
                                            const std::vector<std::string>& labels) {
  auto name = [&](int col) {
    if (col < static_cast<int>(labels.size())) return labels[col];
    return (col < fit.k ? "y" : "x") + std::to_string(col < fit.k ? col + 1 : col - fit.k + 1);
  };
  std::vector<std::string> header = {"series", "intercept"};
  for (int ell = 1; ell <= fit.p; ++ell)
    for (int jcol = 0; jcol < fit.k; ++jcol)
      header.push_back(name(jcol) + ".l" + std::to_string(ell));
  for (int jlag = 1; jlag <= fit.s; ++jlag)
    for (int x = 0; x < fit.m; ++x)
      header.push_back(name(fit.k + x) + ".l" + std::to_string(jlag));
  return header;
}

void write_coefficients_csv(const std::string& path, const sv::CoefficientSet& fit,
                            const std::vector<std::string>& labels) {
  std::ofstream out(path);
  if (!out) sv::fail_data("io", "cannot write " + path);
  const std::vector<std::string> header = coefficient_header(fit, labels);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (int i = 0; i < fit.k; ++i) {
    out << (i < static_cast<int>(labels.size()) ? labels[i] : "y" + std::to_string(i + 1));
    for (int j = 0; j < fit.b.cols(); ++j) out << ',' << sv::detail::format_double(fit.b(i, j));
    out << '\n';
  }
}

sv::Matrix residual_covariance(const sv::CoefficientSet& fit, const sv::SeriesMatrix& data) {
  sv::ModelSpec spec;
  spec.k = fit.k;
  spec.m = fit.m;
  spec.p = fit.p;
  spec.s = fit.s;
  spec.h = fit.h;
  sv::LagRegression reg = sv::build_lag_regression(
      data, spec, fit.direct ? sv::HorizonMode::direct : sv::HorizonMode::iterated_or_onestep);
  sv::Matrix resid = reg.y - fit.b * reg.z;
  sv::Matrix sigma = resid * resid.transpose() / reg.teff;
  return 0.5 * (sigma + sigma.transpose());
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) sv::fail_data("io", "cannot create output directory " + dir);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_cv(const std::string& data_path, const std::string& config_path, const std::string& out_dir,
           int threads) {
  CliConfig cfg = parse_config(config_path);
  LoadedData data = load_data(data_path, cfg.spec.k, cfg.standardize);
  cfg.spec.m = data.series.m;
  sv::CvOptions opts;
  opts.threads = threads;
  sv::CvReport report = sv::rolling_cv(data.series, cfg.spec, opts);

  ensure_out_dir(out_dir);
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["structure"] = sv::penalty_name(cfg.spec.penalty.kind);
  j["p"] = cfg.spec.p;
  j["s"] = cfg.spec.s;
  j["h"] = cfg.spec.h;
  j["mn"] = cfg.spec.mn;
  j["t1"] = report.t1;
  j["t2"] = report.t2;
  j["optimal_lambda"] = report.optimal_lambda;
  j["optimal_index"] = report.optimal_index;
  j["optimal_alpha"] = report.optimal_alpha;
  j["optimal_gamma"] = report.optimal_gamma;
  j["in_sample_msfe"] = report.in_sample_msfe;
  j["oos_msfe"] = report.oos_msfe;
  j["lambda_grid"] = report.grid.values;
  j["per_lambda_msfe"] = report.per_lambda_msfe;
  j["per_lambda_se"] = report.per_lambda_se;
  sv::DiagnosticsExport diag = sv::export_diagnostics(report);
  j["grid_position"] = sv::grid_position_name(diag.grid_position);
  j[report.axis_is_gamma ? "gamma_grid" : "alpha_grid"] = report.axis_values;
  j["msfe_surface"] = matrix_to_json(report.msfe_surface);
  ordered_json bench;
  for (const auto& [key, value] : report.benchmark_msfe) bench[key] = value;
  j["benchmarks"] = std::move(bench);
  save_json(out_dir + "/report.json", j);

  write_coefficients_csv(out_dir + "/coefficients.csv", report.final_coefficients, data.labels);
  write_model(out_dir + "/model.json", report.final_coefficients, data,
              sv::penalty_name(cfg.spec.penalty.kind),
              residual_covariance(report.final_coefficients, data.series));
  sv::write_sparsity_svg(out_dir + "/sparsity.svg", diag.sparsity_grid, cfg.spec.k, cfg.spec.p,
                         cfg.spec.m, cfg.spec.s);
  sv::write_lambda_curve_svg(out_dir + "/lambda_curve.svg", diag.lambda_curve,
                             report.optimal_index);
  std::cout << "selected lambda " << report.optimal_lambda << " (index " << report.optimal_index
            << "), out-of-sample MSFE " << report.oos_msfe << '\n';
  return 0;
}

int run_fit(const std::string& data_path, const std::string& config_path,
            const std::vector<double>& lambdas, const std::string& out_dir) {
  CliConfig cfg = parse_config(config_path);
  LoadedData data = load_data(data_path, cfg.spec.k, cfg.standardize);
  cfg.spec.m = data.series.m;
  cfg.spec.own_lambdas = true;
  if (!lambdas.empty()) cfg.spec.lambdas = lambdas;
  std::vector<sv::CoefficientSet> fits = sv::estimate_fixed(data.series, cfg.spec);
  ensure_out_dir(out_dir);
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const std::string tag = "_" + std::to_string(i);
    write_coefficients_csv(out_dir + "/coefficients" + tag + ".csv", fits[i], data.labels);
    write_model(out_dir + "/model" + tag + ".json", fits[i], data,
                sv::penalty_name(cfg.spec.penalty.kind),
                residual_covariance(fits[i], data.series));
  }
  std::cout << "wrote " << fits.size() << " coefficient sets to " << out_dir << '\n';
  return 0;
}

int run_predict(const std::string& model_path, int n_ahead, const std::string& newx_path,
                const std::string& out_path) {
  StoredModel model = read_model(model_path);
  if (model.history_tail.rows() == 0)
    sv::fail_data("io", "model file carries no history; cannot forecast");
  sv::SeriesMatrix hist;
  hist.values = model.history_tail;
  hist.k = model.fit.k;
  hist.m = model.fit.m;

  sv::Matrix newx;
  if (!newx_path.empty()) {
    sv::CsvTable t = sv::read_csv(newx_path);
    newx = t.values;
    if (newx.cols() != model.fit.m)
      sv::fail_data("io", "newx must supply one column per exogenous series");
    if (model.scaling) {
      for (int j = 0; j < newx.cols(); ++j)
        newx.col(j) = (newx.col(j).array() - model.scaling->mean(model.fit.k + j)) /
                      model.scaling->sd(model.fit.k + j);
    }
  }

  sv::Matrix fc;
  if (model.fit.direct) {
    if (n_ahead != model.fit.h)
      sv::fail_data("dimension_mismatch",
                    "model was fit on a direct h-step design; use --n-ahead equal to h");
    sv::Vector z = sv::lag_column(hist, model.fit.p, model.fit.s,
                                  hist.rows() - 1 + model.fit.h, model.fit.h);
    fc = (model.fit.b * z).transpose();
  } else {
    fc = sv::forecast(model.fit, hist, n_ahead, newx);
  }
  if (model.scaling) {
    for (int j = 0; j < model.fit.k; ++j)
      fc.col(j) = fc.col(j).array() * model.scaling->sd(j) + model.scaling->mean(j);
  }
  std::vector<std::string> header;
  for (int j = 0; j < model.fit.k; ++j)
    header.push_back(model.labels.empty() ? "y" + std::to_string(j + 1) : model.labels[j]);
  if (out_path.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) std::cout << (j ? "," : "") << header[j];
    std::cout << '\n';
    for (int i = 0; i < fc.rows(); ++i) {
      for (int j = 0; j < fc.cols(); ++j)
        std::cout << (j ? "," : "") << sv::detail::format_double(fc(i, j));
      std::cout << '\n';
    }
  } else {
    sv::write_csv(out_path, header, fc);
  }
  return 0;
}

int run_simulate(const std::string& spec_path, std::uint64_t seed, int t_out,
                 const std::string& out_path, int burn_override) {
  ordered_json j = load_json(spec_path);
  check_format_version(j, spec_path);
  const int k = j["k"].get<int>();
  const int p = j["p"].get<int>();
  sv::Matrix phi = matrix_from_json(j["phi"], "phi");
  sv::Matrix sigma = matrix_from_json(j["sigma"], "sigma");
  if (phi.rows() != k || phi.cols() != k * p) sv::fail_data("io", "phi must be k x (k*p)");
  int burn = j.value("burn_in", 500);
  if (burn_override >= 0) burn = burn_override;
  if (t_out <= 0) t_out = j.value("t", 100);
  if (seed == 0) seed = j.value("seed", 1);
  sv::SeriesMatrix out = sv::simulate_var(phi, sigma, t_out, burn, seed);
  std::vector<std::string> header;
  if (j.contains("labels"))
    header = j["labels"].get<std::vector<std::string>>();
  else
    for (int i = 0; i < k; ++i) header.push_back("y" + std::to_string(i + 1));
  sv::write_csv(out_path, header, out.values);
  std::cout << "wrote " << t_out << " simulated rows to " << out_path << '\n';
  return 0;
}

int run_irf(const std::string& model_path, const std::string& shock, double size, int periods,
            bool unit_shocks, const std::string& out_path) {
  StoredModel model = read_model(model_path);
  if (model.sigma_u.rows() != model.fit.k)
    sv::fail_data("io", "model file carries no residual covariance");
  int shock_idx = -1;
  for (std::size_t i = 0; i < model.labels.size(); ++i)
    if (model.labels[i] == shock) shock_idx = static_cast<int>(i);
  if (shock_idx < 0) {
    try {
      shock_idx = std::stoi(shock);
    } catch (...) {
      sv::fail_data("io", "unknown shock series " + shock);
    }
  }
  // the shock is given in raw units; translate through the stored scaling
  double internal = size;
  if (model.scaling) internal = size / model.scaling->sd(shock_idx);
  sv::IrfResult irf = sv::generate_irf(model.fit, model.sigma_u, shock_idx, internal, periods,
                                       unit_shocks);
  if (!irf.stationary)
    std::cerr << "sparsevar: warning: model companion spectral radius " << irf.spectral_radius
              << " >= 1; responses may diverge\n";
  sv::Matrix responses = irf.responses;
  if (model.scaling)
    for (int j = 0; j < model.fit.k; ++j) responses.col(j) *= model.scaling->sd(j);
  std::vector<std::string> header;
  for (int j = 0; j < model.fit.k; ++j)
    header.push_back(model.labels.empty() ? "y" + std::to_string(j + 1) : model.labels[j]);
  sv::write_csv(out_path, header, responses);
  return 0;
}

int run_benchmark(const std::string& data_path, int pmax, int smax, const std::string& criterion,
                  int h, int k, int t2, const std::string& out_path) {
  if (criterion != "aic" && criterion != "bic")
    throw sv::Error(sv::ErrorKind::usage, "bad_flag", "criterion must be aic or bic");
  // benchmark data are used as-is; k defaults to every column endogenous
  sv::CsvTable table = sv::read_csv(data_path);
  sv::SeriesMatrix data;
  data.values = table.values;
  data.k = k > 0 ? k : static_cast<int>(table.values.cols());
  data.m = static_cast<int>(table.values.cols()) - data.k;
  data.labels = table.header;
  data.validate();
  const sv::InfoCriterion crit =
      criterion == "aic" ? sv::InfoCriterion::AIC : sv::InfoCriterion::BIC;
  const int T = data.rows();
  const int eval_start = t2 > 0 ? t2 : (2 * T) / 3;
  if (eval_start >= T) sv::fail_data("insufficient_data", "no evaluation window");

  sv::OrderSelection sel = sv::select_order_ic(data, pmax, smax, crit);
  std::vector<double> errors =
      sv::varx_forecast_eval(data, pmax, smax, eval_start, T - 1, crit, h);
  double msfe = 0.0;
  for (double e : errors) msfe += e;
  msfe /= errors.size();

  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["criterion"] = criterion;
  j["p_max"] = pmax;
  j["s_max"] = smax;
  j["h"] = h;
  j["p_hat"] = sel.p_hat;
  j["s_hat"] = sel.s_hat;
  j["ic_table"] = matrix_to_json(sel.ic_table);
  j["eval_first_target"] = eval_start;
  j["msfe"] = msfe;
  j["per_origin_errors"] = errors;
  save_json(out_path, j);
  std::cout << "selected p=" << sel.p_hat << " s=" << sel.s_hat << ", evaluation MSFE " << msfe
            << '\n';
  return 0;
}

int run_refit(const std::string& model_path, const std::string& data_path,
              const std::string& method, double eps1, const std::string& out_dir) {
  if (method != "rls" && method != "wls" && method != "ifgls")
    throw sv::Error(sv::ErrorKind::usage, "bad_flag", "method must be rls, wls, or ifgls");
  StoredModel model = read_model(model_path);
  if (model.fit.m > 0 || model.fit.s > 0)
    sv::fail_data("non_var_model", "refitting applies to VAR models only");
  if (model.structure != "Basic")
    sv::fail_data("unsupported_structure", "refitting is offered for Basic-structure fits only");
  sv::CsvTable table = sv::read_csv(data_path);
  LoadedData data;
  data.series.values = table.values;
  data.series.k = model.fit.k;
  data.series.m = 0;
  data.labels = table.header;
  data.series.validate();
  if (model.scaling) {
    data.series.values = model.scaling->apply(data.series.values);
    data.scaling = model.scaling;
  }
  sv::ModelSpec spec;
  spec.k = model.fit.k;
  spec.p = model.fit.p;
  sv::LagRegression reg = sv::build_lag_regression(data.series, spec);
  sv::RestrictionMap map = sv::restriction_from_fit(model.fit, eps1);
  sv::CoefficientSet refit;
  sv::Matrix sigma_hat;
  if (method == "rls") {
    refit = sv::relaxed_ls(reg, map);
  } else if (method == "wls") {
    sv::Vector variances(model.fit.k);
    for (int i = 0; i < model.fit.k; ++i) {
      const auto col = data.series.values.col(i);
      const double mu = col.mean();
      variances(i) = (col.array() - mu).square().sum() / col.size();
    }
    refit = sv::weighted_relaxed_ls(reg, map, variances);
  } else {
    sv::IfglsResult res = sv::ifgls(reg, map, sv::Matrix::Identity(model.fit.k, model.fit.k));
    refit = res.coefficients;
    sigma_hat = res.sigma_hat;
    if (!res.converged)
      std::cerr << "sparsevar: warning: IFGLS hit the iteration cap before converging\n";
  }
  refit.lambda = model.fit.lambda;
  refit.h = model.fit.h;
  ensure_out_dir(out_dir);
  write_coefficients_csv(out_dir + "/coefficients_refit.csv", refit, data.labels);
  if (sigma_hat.rows() == 0) sigma_hat = residual_covariance(refit, data.series);
  write_model(out_dir + "/model_refit.json", refit, data, model.structure, sigma_hat);
  std::cout << "refit (" << method << ") wrote model_refit.json with support size " << map.total()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured-penalty VAR/VARX estimation and forecasting"};
  app.require_subcommand(1);

  std::string data_path, config_path, out_dir = ".", model_path, newx_path, out_path;
  std::string shock, criterion = "aic", method = "rls", spec_path;
  std::vector<double> lambdas;
  int n_ahead = 1, periods = 20, pmax = 4, smax = 0, h = 1, threads = 0, t_out = 0, t2 = 0, k = 0;
  int burn_override = -1;
  double size = 1.0, eps1 = 0.0;
  std::uint64_t seed = 0;
  bool unit_shocks = false;

  auto* cv = app.add_subcommand("cv", "rolling cross validation with benchmarks");
  cv->add_option("--data", data_path, "CSV data file")->required();
  cv->add_option("--config", config_path, "JSON model config")->required();
  cv->add_option("--out", out_dir, "output directory")->required();
  cv->add_option("--threads", threads, "worker threads for the penalty grid");

  auto* fit = app.add_subcommand("fit", "fixed-lambda estimation on the full sample");
  fit->add_option("--data", data_path)->required();
  fit->add_option("--config", config_path)->required();
  fit->add_option("--lambda", lambdas, "penalty values")->delimiter(',');
  fit->add_option("--out", out_dir)->required();

  auto* predict = app.add_subcommand("predict", "n-step ahead forecasts from a stored model");
  predict->add_option("--model", model_path)->required();
  predict->add_option("--n-ahead", n_ahead);
  predict->add_option("--newx", newx_path, "future exogenous rows (CSV)");
  predict->add_option("--out", out_path, "output CSV (default: stdout)");

  auto* simulate = app.add_subcommand("simulate", "simulate a Gaussian VAR realization");
  simulate->add_option("--spec", spec_path, "JSON simulation spec")->required();
  simulate->add_option("--seed", seed);
  simulate->add_option("--t", t_out, "output length");
  simulate->add_option("--burn-in", burn_override);
  simulate->add_option("--out", out_path)->required();

  auto* irf = app.add_subcommand("irf", "orthogonalized impulse responses");
  irf->add_option("--model", model_path)->required();
  irf->add_option("--shock", shock, "series label or 0-based index")->required();
  irf->add_option("--size", size, "shock size in raw units");
  irf->add_option("--periods", periods);
  irf->add_flag("--unit-shocks", unit_shocks, "rescale the factor to unit-variance shocks");
  irf->add_option("--out", out_path)->required();

  auto* benchmark = app.add_subcommand("benchmark", "AIC/BIC least-squares benchmark");
  benchmark->add_option("--data", data_path)->required();
  benchmark->add_option("--pmax", pmax)->required();
  benchmark->add_option("--smax", smax);
  benchmark->add_option("--criterion", criterion, "aic or bic");
  benchmark->add_option("--horizon", h, "forecast horizon");
  benchmark->add_option("--k", k, "endogenous columns (default: all)");
  benchmark->add_option("--t2", t2, "first evaluation target (default 2T/3)");
  benchmark->add_option("--out", out_path)->required();

  auto* refit = app.add_subcommand("refit", "post-selection least squares / GLS refitting");
  refit->add_option("--model", model_path)->required();
  refit->add_option("--data", data_path)->required();
  refit->add_option("--method", method, "rls, wls, or ifgls")->required();
  refit->add_option("--eps1", eps1, "support magnitude threshold");
  refit->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "sparsevar: error kind=usage tag=bad_flag msg=\"" << e.what() << "\"\n";
    return 2;
  }

  try {
    if (*cv) return run_cv(data_path, config_path, out_dir, threads);
    if (*fit) return run_fit(data_path, config_path, lambdas, out_dir);
    if (*predict) return run_predict(model_path, n_ahead, newx_path, out_path);
    if (*simulate) return run_simulate(spec_path, seed, t_out, out_path, burn_override);
    if (*irf) return run_irf(model_path, shock, size, periods, unit_shocks, out_path);
    if (*benchmark) return run_benchmark(data_path, pmax, smax, criterion, h, k, t2, out_path);
    if (*refit) return run_refit(model_path, data_path, method, eps1, out_dir);
  } catch (const sv::Error& e) {
    const char* kind = e.kind() == sv::ErrorKind::usage
                           ? "usage"
                           : e.kind() == sv::ErrorKind::data ? "data" : "numeric";
    std::cerr << "sparsevar: error kind=" << kind << " tag=" << e.tag() << " msg=\"" << e.what()
              << "\"\n";
    return e.kind() == sv::ErrorKind::usage ? 2 : e.kind() == sv::ErrorKind::data ? 3 : 4;
  } catch (const std::exception& e) {
    std::cerr << "sparsevar: error kind=numeric tag=internal msg=\"" << e.what() << "\"\n";
    return 4;
  }
  return 2;
}
