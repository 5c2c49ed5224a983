#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sparsevar/analysis.hpp"
#include "sparsevar/grid.hpp"
#include "sparsevar/lag.hpp"
#include "sparsevar/least_squares.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/refit.hpp"
#include "sparsevar/solvers.hpp"
#include "sparsevar/types.hpp"

namespace sparsevar {

inline HorizonMode horizon_mode_for(const ModelSpec& spec) {
  if (spec.h > 1 && !(spec.recursive && spec.is_var())) return HorizonMode::direct;
  return HorizonMode::iterated_or_onestep;
}

struct CvOptions {
  SolverOptions solver;
  int threads = 0;  // 0: SPARSEVAR_THREADS env or hardware concurrency
};

struct CvReport {
  double optimal_lambda = 0.0;
  int optimal_index = 0;
  double optimal_alpha = 0.0;
  double optimal_gamma = 0.0;
  double in_sample_msfe = 0.0;
  double oos_msfe = 0.0;
  std::vector<double> per_lambda_msfe;  // along the selected alpha/gamma axis
  std::vector<double> per_lambda_se;
  LambdaGrid grid;                      // grid of the selected axis
  std::vector<double> axis_values;      // alpha grid (or gamma grid for Tapered)
  bool axis_is_gamma = false;
  Matrix msfe_surface;                  // axis x lambda
  std::map<std::string, double> benchmark_msfe;  // mean, rw, aic_ls, bic_ls
  CoefficientSet final_coefficients;
  int t1 = 0, t2 = 0;
};

namespace detail {

inline GroupPartition partition_for(const ModelSpec& spec, double gamma) {
  ModelSpec s = spec;
  s.penalty.gamma = gamma;
  return build_partition(s);
}

/// Fit one penalized model on `train`, applying the Minnesota shift and the
/// optional post-selection refit, and restore the random-walk offsets
/// afterwards.  Reads nothing but `train`.
inline CoefficientSet fit_one(const SeriesMatrix& train, const ModelSpec& spec,
                              const GroupPartition& part, double lambda, double alpha,
                              const SolverOptions& opts) {
  LagRegression reg = build_lag_regression(train, spec, horizon_mode_for(spec));
  const bool shift = spec.mn && !spec.c.empty();
  if (shift) reg = minnesota_shift_forward(reg, spec.c);
  CoefficientSet fit = fit_penalized(reg, part, lambda, alpha, opts);
  if (spec.rvar != RefitMode::none) {
    RestrictionMap map = restriction_from_fit(fit);
    switch (spec.rvar) {
      case RefitMode::rls: {
        CoefficientSet refit = relaxed_ls(reg, map);
        refit.lambda = fit.lambda;
        refit.alpha = fit.alpha;
        fit = refit;
        break;
      }
      case RefitMode::wls: {
        Vector variances(train.k);
        for (int i = 0; i < train.k; ++i) {
          const auto col = train.values.col(i);
          const double mu = col.mean();
          variances(i) = (col.array() - mu).square().sum() / col.size();
        }
        CoefficientSet refit = weighted_relaxed_ls(reg, map, variances);
        refit.lambda = fit.lambda;
        refit.alpha = fit.alpha;
        fit = refit;
        break;
      }
      case RefitMode::ifgls: {
        IfglsResult res = ifgls(reg, map, Matrix::Identity(train.k, train.k));
        res.coefficients.lambda = fit.lambda;
        res.coefficients.alpha = fit.alpha;
        fit = res.coefficients;
        break;
      }
      case RefitMode::none: break;
    }
  }
  if (shift) fit = minnesota_shift_inverse(fit, spec.c);
  fit.gamma = spec.penalty.gamma;
  fit.h = spec.h;
  fit.direct = horizon_mode_for(spec) == HorizonMode::direct;
  return fit;
}

inline SeriesMatrix head_slice(const SeriesMatrix& data, int rows) {
  SeriesMatrix out;
  out.values = data.values.topRows(rows);
  out.k = data.k;
  out.m = data.m;
  return out;
}

}  // namespace detail

/// Expanding-window forecasts of one (lambda, alpha/gamma) grid cell over the
/// target rows [first_target, last_target] (0-based).  The fit for a target
/// reads only observations dated up to target - h; consecutive fits share
/// warm starts.
inline std::vector<Vector> cv_cell_forecasts(const SeriesMatrix& data, const ModelSpec& spec,
                                             const GroupPartition& part, double lambda,
                                             double alpha, int first_target, int last_target,
                                             const SolverOptions& opts = {}) {
  std::vector<Vector> forecasts;
  forecasts.reserve(std::max(0, last_target - first_target + 1));
  SolverOptions o = opts;
  const HorizonMode mode = horizon_mode_for(spec);
  for (int target = first_target; target <= last_target; ++target) {
    SeriesMatrix train = detail::head_slice(data, target - spec.h + 1);
    CoefficientSet fit = detail::fit_one(train, spec, part, lambda, alpha, o);
    o.warm_start = fit.b.rightCols(fit.coef_cols());
    if (spec.mn && !spec.c.empty()) {
      // warm-start the solver with the shifted-model coefficients
      for (int i = 0; i < fit.k; ++i) (*o.warm_start)(i, i) -= spec.c[i];
    }
    Vector fc;
    if (mode == HorizonMode::direct || spec.h == 1) {
      fc = fit.b * lag_column(train, spec.p, spec.s, target, fit.direct ? spec.h : 1);
    } else {
      fc = forecast(fit, train, spec.h).row(spec.h - 1).transpose();
    }
    forecasts.push_back(std::move(fc));
  }
  return forecasts;
}

/// Largest lambda (smallest index) whose MSFE is within one standard error of
/// the minimum.
inline int one_se_select(const std::vector<double>& msfe, const std::vector<double>& se) {
  if (msfe.empty() || msfe.size() != se.size())
    fail_data("dimension_mismatch", "MSFE and SE vectors must have equal nonzero length");
  int argmin = 0;
  for (std::size_t i = 1; i < msfe.size(); ++i)
    if (msfe[i] < msfe[argmin]) argmin = static_cast<int>(i);
  const double threshold = msfe[argmin] + se[argmin];
  for (std::size_t i = 0; i < msfe.size(); ++i)
    if (msfe[i] <= threshold) return static_cast<int>(i);
  return argmin;
}

/// Rolling-origin penalty selection with out-of-sample evaluation and
/// benchmark comparison.
inline CvReport rolling_cv(const SeriesMatrix& data, const ModelSpec& spec,
                           const CvOptions& copt = {}) {
  data.validate();
  const int T = data.rows();
  spec.validate(T);
  copt.solver.validate();
  const int T1 = spec.t1_for(T), T2 = spec.t2_for(T);
  if (T2 + spec.h > T) fail_data("insufficient_data", "need t2 + h <= T");
  if (spec.rvar != RefitMode::none &&
      (spec.penalty.kind != PenaltyKind::Basic || !spec.is_var()))
    fail_data("unsupported_structure", "refitting is offered for Basic VAR supports only");

  const bool tapered = spec.penalty.kind == PenaltyKind::Tapered;
  const bool sparse = is_sparse_group(spec.penalty.kind);
  std::vector<double> axis;
  if (tapered) {
    for (int i = 0; i <= 10; ++i) axis.push_back(i / 10.0);
  } else if (sparse) {
    axis = spec.effective_alpha_grid();
  } else {
    axis = {spec.default_alpha()};
  }
  const int n_axis = static_cast<int>(axis.size());

  // per-axis partitions and lambda grids, built from the first training
  // window so no fit ever sees data beyond its own origin
  SeriesMatrix first_train = detail::head_slice(data, T1 - spec.h + 1);
  std::vector<GroupPartition> parts;
  std::vector<LambdaGrid> grids;
  for (int a = 0; a < n_axis; ++a) {
    ModelSpec sp = spec;
    if (tapered) sp.penalty.gamma = axis[a];
    GroupPartition part = build_partition(sp);
    if (spec.own_lambdas) {
      grids.push_back(user_lambda_grid(spec.lambdas));
    } else {
      LagRegression reg0 = build_lag_regression(first_train, sp, horizon_mode_for(sp));
      if (sp.mn && !sp.c.empty()) reg0 = minnesota_shift_forward(reg0, sp.c);
      const double alpha = sparse ? axis[a] : sp.default_alpha();
      grids.push_back(lambda_grid_for(reg0, part, alpha, sp.grid_depth, sp.n_lambda, copt.solver));
    }
    parts.push_back(std::move(part));
  }
  const int n_lambda = static_cast<int>(grids.front().values.size());

  // training-window evaluation over the full (axis, lambda) grid
  const int cv_first = T1, cv_last = T2 - 1;
  const int n_origins = cv_last - cv_first + 1;
  Matrix msfe = Matrix::Zero(n_axis, n_lambda);
  Matrix se = Matrix::Zero(n_axis, n_lambda);
  const int n_cells = n_axis * n_lambda;
  std::vector<std::vector<double>> cell_errors(n_cells);
  parallel_for(n_cells, resolve_thread_count(copt.threads), [&](int cell) {
    const int a = cell / n_lambda, l = cell % n_lambda;
    ModelSpec sp = spec;
    if (tapered) sp.penalty.gamma = axis[a];
    const double alpha = sparse ? axis[a] : sp.default_alpha();
    std::vector<Vector> fc = cv_cell_forecasts(data, sp, parts[a], grids[a].values[l], alpha,
                                               cv_first, cv_last, copt.solver);
    std::vector<double> errs(fc.size());
    for (std::size_t t = 0; t < fc.size(); ++t) {
      Vector truth = data.values.row(cv_first + static_cast<int>(t)).head(spec.k).transpose();
      errs[t] = (fc[t] - truth).squaredNorm();
    }
    cell_errors[cell] = std::move(errs);
  });
  for (int cell = 0; cell < n_cells; ++cell) {
    const int a = cell / n_lambda, l = cell % n_lambda;
    const auto& errs = cell_errors[cell];
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= n_origins;
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    msfe(a, l) = mean;
    se(a, l) = n_origins > 1 ? std::sqrt(var / (n_origins - 1)) / std::sqrt(double(n_origins)) : 0.0;
  }

  // select the minimizing cell (ONESE applies along the winning axis)
  int best_a = 0, best_l = 0;
  for (int a = 0; a < n_axis; ++a)
    for (int l = 0; l < n_lambda; ++l)
      if (msfe(a, l) < msfe(best_a, best_l)) {
        best_a = a;
        best_l = l;
      }
  CvReport report;
  report.per_lambda_msfe.assign(msfe.row(best_a).begin(), msfe.row(best_a).end());
  report.per_lambda_se.assign(se.row(best_a).begin(), se.row(best_a).end());
  if (spec.one_se) best_l = one_se_select(report.per_lambda_msfe, report.per_lambda_se);

  report.optimal_index = best_l;
  report.optimal_lambda = grids[best_a].values[best_l];
  report.optimal_alpha = sparse ? axis[best_a] : spec.default_alpha();
  report.optimal_gamma = tapered ? axis[best_a] : spec.penalty.gamma;
  report.in_sample_msfe = msfe(best_a, best_l);
  report.grid = grids[best_a];
  report.axis_values = axis;
  report.axis_is_gamma = tapered;
  report.msfe_surface = msfe;
  report.t1 = T1;
  report.t2 = T2;

  // out-of-sample evaluation at the selected cell, refit each origin
  ModelSpec chosen = spec;
  if (tapered) chosen.penalty.gamma = report.optimal_gamma;
  const int oos_first = T2, oos_last = T - 1;
  std::vector<Vector> oos_fc = cv_cell_forecasts(data, chosen, parts[best_a],
                                                 report.optimal_lambda, report.optimal_alpha,
                                                 oos_first, oos_last, copt.solver);
  double oos = 0.0;
  for (std::size_t t = 0; t < oos_fc.size(); ++t) {
    Vector truth = data.values.row(oos_first + static_cast<int>(t)).head(spec.k).transpose();
    oos += (oos_fc[t] - truth).squaredNorm();
  }
  report.oos_msfe = oos / static_cast<double>(oos_fc.size());

  // benchmarks over the identical out-of-sample targets; the mean benchmark
  // averages the same effective sample as the penalized fits
  const int align = std::max(spec.p, spec.s) + (horizon_mode_for(spec) == HorizonMode::direct
                                                    ? spec.h - 1
                                                    : 0);
  NaiveBenchmarks naive = naive_benchmarks(data, oos_first, oos_last, spec.h, align);
  report.benchmark_msfe["mean"] = naive.mean_msfe;
  report.benchmark_msfe["rw"] = naive.rw_msfe;
  if (spec.ic_benchmarks) {
    auto mean_of = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double e : v) s += e;
      return s / static_cast<double>(v.size());
    };
    report.benchmark_msfe["aic_ls"] = mean_of(
        varx_forecast_eval(data, spec.p, spec.s, oos_first, oos_last, InfoCriterion::AIC, spec.h));
    report.benchmark_msfe["bic_ls"] = mean_of(
        varx_forecast_eval(data, spec.p, spec.s, oos_first, oos_last, InfoCriterion::BIC, spec.h));
  }

  // final coefficients: the selected cell refit on all available data
  report.final_coefficients = detail::fit_one(data, chosen, parts[best_a], report.optimal_lambda,
                                              report.optimal_alpha, copt.solver);
  return report;
}

/// Fixed-lambda estimation on the full sample, one coefficient set per user
/// lambda, in the order given.
inline std::vector<CoefficientSet> estimate_fixed(const SeriesMatrix& data, const ModelSpec& spec,
                                                  const SolverOptions& opts = {}) {
  data.validate();
  spec.validate();
  if (!spec.own_lambdas || spec.lambdas.empty())
    fail_data("dimension_mismatch", "estimate_fixed requires own_lambdas with a nonempty list");
  GroupPartition part = build_partition(spec);
  const double alpha = is_sparse_group(spec.penalty.kind)
                           ? spec.effective_alpha_grid().front()
                           : spec.default_alpha();
  std::vector<CoefficientSet> fits;
  fits.reserve(spec.lambdas.size());
  for (double lam : spec.lambdas)
    fits.push_back(detail::fit_one(data, spec, part, lam, alpha, opts));
  return fits;
}

/// Plot-ready diagnostics for a finished CV run.
inline DiagnosticsExport export_diagnostics(const CvReport& report) {
  DiagnosticsExport out;
  const CoefficientSet& fit = report.final_coefficients;
  out.sparsity_grid = fit.b.rightCols(fit.coef_cols());
  const int n = static_cast<int>(report.grid.values.size());
  for (int i = 0; i < n; ++i) {
    LambdaCurvePoint pt;
    pt.lambda = report.grid.values[i];
    pt.msfe = report.per_lambda_msfe[i];
    pt.se = report.per_lambda_se[i];
    out.lambda_curve.push_back(pt);
  }
  if (n <= 1)
    out.grid_position = GridPosition::at_max_boundary;
  else if (report.optimal_index == 0)
    out.grid_position = GridPosition::at_max_boundary;
  else if (report.optimal_index == n - 1)
    out.grid_position = GridPosition::at_min_boundary;
  else
    out.grid_position = GridPosition::interior;
  return out;
}

}  // namespace sparsevar
