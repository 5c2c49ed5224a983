#include <catch2/catch_amalgamated.hpp>

#include <cstring>

#include "sparsevar/cv.hpp"
#include "sparsevar/simulate.hpp"
#include "support/oracles.hpp"

using namespace sparsevar;

namespace {

ModelSpec basic_spec(int k, int p) {
  ModelSpec spec;
  spec.k = k;
  spec.p = p;
  spec.penalty.kind = PenaltyKind::Basic;
  spec.n_lambda = 8;
  spec.grid_depth = 20.0;
  return spec;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("constant-zero data yields zero MSFE everywhere") {
  SeriesMatrix data;
  data.values = Matrix::Zero(60, 2);
  data.k = 2;
  ModelSpec spec = basic_spec(2, 1);
  spec.ic_benchmarks = false;
  CvReport report = rolling_cv(data, spec);
  for (double m : report.per_lambda_msfe) REQUIRE(m == 0.0);
  REQUIRE(report.oos_msfe == 0.0);
  REQUIRE(report.in_sample_msfe == 0.0);
}

TEST_CASE("at a huge lambda the CV forecasts are the training means") {
  Matrix phi = oracles::random_stationary_var(2, 1, 0.5, 7);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 75, 100, 8);
  ModelSpec spec = basic_spec(2, 1);
  spec.own_lambdas = true;
  spec.lambdas = {1e8};
  spec.ic_benchmarks = false;
  CvReport report = rolling_cv(data, spec);
  const int T1 = report.t1, T2 = report.t2;
  // the aligned mean benchmark over the same CV targets
  NaiveBenchmarks nb = naive_benchmarks(data, T1, T2 - 1, 1, /*skip=*/1);
  REQUIRE(report.per_lambda_msfe[0] == Catch::Approx(nb.mean_msfe).margin(1e-10));
  // and the reported OOS mean benchmark matches the all-zero model's OOS MSFE
  REQUIRE(report.oos_msfe == Catch::Approx(report.benchmark_msfe.at("mean")).margin(1e-10));
}

TEST_CASE("repeated runs and thread counts give bit-identical reports") {
  Matrix phi = oracles::random_stationary_var(3, 2, 0.6, 17);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(3, 3), 80, 100, 18);
  ModelSpec spec = basic_spec(3, 2);
  CvOptions one;
  one.threads = 1;
  CvOptions four;
  four.threads = 4;
  CvReport a = rolling_cv(data, spec, one);
  CvReport b = rolling_cv(data, spec, one);
  CvReport c = rolling_cv(data, spec, four);
  for (const CvReport* r : {&b, &c}) {
    REQUIRE(a.optimal_lambda == r->optimal_lambda);
    REQUIRE(a.optimal_index == r->optimal_index);
    REQUIRE(a.oos_msfe == r->oos_msfe);
    REQUIRE(a.per_lambda_msfe == r->per_lambda_msfe);
    REQUIRE(bit_equal(a.final_coefficients.b, r->final_coefficients.b));
    REQUIRE(bit_equal(a.msfe_surface, r->msfe_surface));
    REQUIRE(a.benchmark_msfe == r->benchmark_msfe);
  }
}

TEST_CASE("forecast-origin hygiene: future corruption never leaks in") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Matrix phi = oracles::random_stationary_var(2, 2, 0.6, 200 + seed);
    SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 70, 100, 2000 + seed);
    ModelSpec spec = basic_spec(2, 2);
    GroupPartition part = build_partition(spec);
    const int first = 30, last = 50;
    std::vector<Vector> clean = cv_cell_forecasts(data, spec, part, 0.4, 0.0, first, last);
    for (int cutoff : {35, 44, 50}) {
      SeriesMatrix corrupted = data;
      for (int r = cutoff - spec.h + 1; r < corrupted.rows(); ++r)
        corrupted.values.row(r).setConstant(std::numeric_limits<double>::quiet_NaN());
      std::vector<Vector> dirty = cv_cell_forecasts(corrupted, spec, part, 0.4, 0.0, first, cutoff);
      for (int t = 0; t <= cutoff - first; ++t)
        REQUIRE(std::memcmp(clean[t].data(), dirty[t].data(), sizeof(double) * 2) == 0);
    }
  }
}

TEST_CASE("iterated and direct forecasts coincide at h = 1") {
  Matrix phi = oracles::random_stationary_var(2, 1, 0.5, 23);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 70, 100, 24);
  ModelSpec spec = basic_spec(2, 1);
  spec.ic_benchmarks = false;
  ModelSpec rec = spec;
  rec.recursive = true;
  CvReport a = rolling_cv(data, spec);
  CvReport b = rolling_cv(data, rec);
  REQUIRE(a.optimal_lambda == b.optimal_lambda);
  REQUIRE(a.per_lambda_msfe == b.per_lambda_msfe);
  REQUIRE(a.oos_msfe == b.oos_msfe);
  REQUIRE(bit_equal(a.final_coefficients.b, b.final_coefficients.b));
}

TEST_CASE("estimate_fixed") {
  Matrix phi = oracles::random_stationary_var(2, 1, 0.5, 29);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 80, 100, 30);
  ModelSpec spec = basic_spec(2, 1);
  spec.ic_benchmarks = false;
  CvReport report = rolling_cv(data, spec);

  SECTION("re-running at the selected lambda reproduces the final coefficients") {
    ModelSpec fixed = spec;
    fixed.own_lambdas = true;
    fixed.lambdas = {report.optimal_lambda};
    std::vector<CoefficientSet> fits = estimate_fixed(data, fixed);
    REQUIRE(fits.size() == 1);
    REQUIRE((fits[0].b - report.final_coefficients.b).cwiseAbs().maxCoeff() < 1e-8);
  }
  SECTION("a huge lambda gives a zero slice, order preserved") {
    ModelSpec fixed = spec;
    fixed.own_lambdas = true;
    fixed.lambdas = {1e9, report.optimal_lambda};
    std::vector<CoefficientSet> fits = estimate_fixed(data, fixed);
    REQUIRE(fits.size() == 2);
    REQUIRE(fits[0].lambda == 1e9);
    REQUIRE(fits[0].b.rightCols(fits[0].coef_cols()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(fits[1].lambda == report.optimal_lambda);
    REQUIRE(fits[1].b.rightCols(fits[1].coef_cols()).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("one-standard-error selection") {
  REQUIRE(one_se_select({2.0, 2.0, 2.0}, {0.1, 0.1, 0.1}) == 0);
  REQUIRE(one_se_select({5.0, 3.0, 4.0}, {0.0, 0.0, 0.0}) == 1);
  REQUIRE(one_se_select({5.0, 3.1, 3.0, 3.4}, {0.5, 0.3, 0.2, 0.1}) == 1);
}

TEST_CASE("penalized VAR beats the random walk on stationary data") {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Matrix phi = oracles::random_stationary_var(2, 1, 0.7, 300 + seed);
    SeriesMatrix data = simulate_var(phi, 0.05 * Matrix::Identity(2, 2), 90, 200, 3000 + seed);
    ModelSpec spec = basic_spec(2, 1);
    spec.ic_benchmarks = false;
    CvReport report = rolling_cv(data, spec);
    if (report.oos_msfe <= report.benchmark_msfe.at("rw")) ++wins;
  }
  REQUIRE(wins >= 18);
}

TEST_CASE("joint (lambda, alpha) selection over a sparse grid") {
  Matrix phi = oracles::random_stationary_var(2, 1, 0.6, 41);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 70, 100, 42);
  ModelSpec spec = basic_spec(2, 1);
  spec.penalty.kind = PenaltyKind::SparseLag;
  spec.alpha_grid = {0.2, 0.8};
  spec.n_lambda = 5;
  spec.ic_benchmarks = false;
  CvReport report = rolling_cv(data, spec);
  REQUIRE(report.msfe_surface.rows() == 2);
  REQUIRE(report.msfe_surface.cols() == 5);
  REQUIRE((report.optimal_alpha == 0.2 || report.optimal_alpha == 0.8));
  REQUIRE(report.axis_values == std::vector<double>{0.2, 0.8});
}

TEST_CASE("tapered runs search the gamma grid") {
  Matrix phi = oracles::random_stationary_var(2, 2, 0.6, 51);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 60, 100, 52);
  ModelSpec spec = basic_spec(2, 2);
  spec.penalty.kind = PenaltyKind::Tapered;
  spec.n_lambda = 4;
  spec.ic_benchmarks = false;
  CvReport report = rolling_cv(data, spec);
  REQUIRE(report.axis_is_gamma);
  REQUIRE(report.axis_values.size() == 11);
  REQUIRE(report.optimal_gamma >= 0.0);
  REQUIRE(report.optimal_gamma <= 1.0);
  REQUIRE(report.final_coefficients.gamma == report.optimal_gamma);
}

TEST_CASE("ONESE picks a lambda at least as large as the minimizer") {
  Matrix phi = oracles::random_stationary_var(2, 1, 0.6, 61);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 80, 100, 62);
  ModelSpec spec = basic_spec(2, 1);
  spec.ic_benchmarks = false;
  CvReport plain = rolling_cv(data, spec);
  ModelSpec onese = spec;
  onese.one_se = true;
  CvReport heur = rolling_cv(data, onese);
  REQUIRE(heur.optimal_index <= plain.optimal_index);
  REQUIRE(heur.optimal_lambda >= plain.optimal_lambda);
}

TEST_CASE("refit modes run end to end inside CV") {
  Matrix phi = oracles::random_stationary_var(2, 1, 0.6, 71);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 70, 100, 72);
  for (RefitMode mode : {RefitMode::rls, RefitMode::wls, RefitMode::ifgls}) {
    ModelSpec spec = basic_spec(2, 1);
    spec.rvar = mode;
    spec.ic_benchmarks = false;
    spec.n_lambda = 4;
    CvReport report = rolling_cv(data, spec);
    REQUIRE(std::isfinite(report.oos_msfe));
  }
  // refitting demands the Basic structure
  ModelSpec bad = basic_spec(2, 1);
  bad.penalty.kind = PenaltyKind::Lag;
  bad.rvar = RefitMode::rls;
  REQUIRE_THROWS_AS(rolling_cv(data, bad), Error);
}

TEST_CASE("minnesota option shrinks flagged series toward a random walk in CV") {
  const int k = 2, T = 100;
  GaussianRng rng(14);
  SeriesMatrix data;
  data.values.resize(T, k);
  data.k = k;
  Vector level = Vector::Zero(k);
  for (int t = 0; t < T; ++t) {
    level(0) += 0.1 * rng.normal();       // random walk
    data.values(t, 0) = level(0);
    data.values(t, 1) = 0.2 * (t > 0 ? data.values(t - 1, 1) : 0.0) + 0.1 * rng.normal();
  }
  ModelSpec spec = basic_spec(k, 1);
  spec.mn = true;
  spec.c = {1.0, 0.0};
  spec.ic_benchmarks = false;
  CvReport report = rolling_cv(data, spec);
  REQUIRE(std::isfinite(report.oos_msfe));
  // at the largest grid value the shifted solver is fully shrunk, so the
  // final fit at the selected lambda keeps the flagged diagonal near one
  ModelSpec at_max = spec;
  at_max.own_lambdas = true;
  at_max.lambdas = {1e8};
  CvReport shrunk = rolling_cv(data, at_max);
  REQUIRE(shrunk.final_coefficients.b(0, 1) == Catch::Approx(1.0));
  REQUIRE(shrunk.final_coefficients.b(1, 2) == Catch::Approx(0.0));
}

TEST_CASE("rolling_cv rejects windows that spill past the sample") {
  Matrix phi = oracles::random_stationary_var(2, 1, 0.5, 15);
  SeriesMatrix data = simulate_var(phi, Matrix::Identity(2, 2), 60, 100, 16);
  ModelSpec spec = basic_spec(2, 1);
  spec.h = 30;  // t2 + h > T
  try {
    rolling_cv(data, spec);
    FAIL("expected error");
  } catch (const Error& e) {
    REQUIRE(e.tag() == "insufficient_data");
  }
}

TEST_CASE("diagnostics export flags the grid position") {
  CvReport report;
  report.grid = build_lambda_grid(4.0, 10.0, 4);
  report.per_lambda_msfe = {4.0, 3.0, 2.0, 1.0};
  report.per_lambda_se = {0.1, 0.1, 0.1, 0.1};
  report.final_coefficients.k = 1;
  report.final_coefficients.p = 1;
  report.final_coefficients.b = Matrix::Zero(1, 2);
  report.optimal_index = 0;
  REQUIRE(export_diagnostics(report).grid_position == GridPosition::at_max_boundary);
  report.optimal_index = 3;
  REQUIRE(export_diagnostics(report).grid_position == GridPosition::at_min_boundary);
  report.optimal_index = 2;
  DiagnosticsExport diag = export_diagnostics(report);
  REQUIRE(diag.grid_position == GridPosition::interior);
  REQUIRE(diag.lambda_curve.size() == 4);
  REQUIRE(diag.sparsity_grid.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("multi-step horizons: direct and recursive modes run and differ") {
  Matrix phi = oracles::random_stationary_var(2, 2, 0.7, 81);
  SeriesMatrix data = simulate_var(phi, 0.3 * Matrix::Identity(2, 2), 90, 100, 82);
  ModelSpec direct = basic_spec(2, 2);
  direct.h = 3;
  direct.ic_benchmarks = false;
  CvReport rd = rolling_cv(data, direct);
  REQUIRE(std::isfinite(rd.oos_msfe));
  REQUIRE(rd.final_coefficients.direct);

  ModelSpec recur = direct;
  recur.recursive = true;
  CvReport rr = rolling_cv(data, recur);
  REQUIRE(std::isfinite(rr.oos_msfe));
  REQUIRE_FALSE(rr.final_coefficients.direct);
}

TEST_CASE("EFX cross-validation end to end") {
  const int k = 2, m = 2, p = 2, T = 80;
  GaussianRng rng(95);
  Matrix xdata = rng.normal_matrix(T, m);
  SeriesMatrix data;
  data.values.resize(T, k + m);
  data.k = k;
  data.m = m;
  data.values.rightCols(m) = xdata;
  data.values.block(0, 0, p, k).setZero();
  for (int t = p; t < T; ++t)
    for (int i = 0; i < k; ++i)
      data.values(t, i) = 0.3 * data.values(t - 1, i) + 0.6 * xdata(t - 1, i) +
                          0.1 * rng.normal();
  ModelSpec spec;
  spec.k = k;
  spec.m = m;
  spec.p = p;
  spec.s = p;  // EFX requires s = p
  spec.penalty.kind = PenaltyKind::EFX;
  spec.n_lambda = 6;
  spec.ic_benchmarks = false;
  CvReport report = rolling_cv(data, spec);
  REQUIRE(std::isfinite(report.oos_msfe));
  // the endogenous-first pattern must hold in the final coefficients
  const CoefficientSet& fit = report.final_coefficients;
  for (int ell = 1; ell <= p; ++ell)
    for (int row = 0; row < k; ++row) {
      const double beta_norm =
          fit.b.block(row, 1 + k * p + (ell - 1) * m, 1, m).cwiseAbs().sum();
      const double phi_norm = fit.phi_lag(ell).row(row).cwiseAbs().sum();
      if (beta_norm > 0.0) REQUIRE(phi_norm > 0.0);
    }
}

TEST_CASE("VARX multi-step horizons use direct designs") {
  const int k = 2, m = 1, T = 90;
  GaussianRng rng(97);
  Matrix xdata = rng.normal_matrix(T, m);
  SeriesMatrix data;
  data.values.resize(T, k + m);
  data.k = k;
  data.m = m;
  data.values.rightCols(m) = xdata;
  data.values.block(0, 0, 1, k).setZero();
  for (int t = 1; t < T; ++t)
    for (int i = 0; i < k; ++i)
      data.values(t, i) = 0.5 * data.values(t - 1, i) + 0.4 * xdata(t - 1, 0) +
                          0.1 * rng.normal();
  ModelSpec spec;
  spec.k = k;
  spec.m = m;
  spec.p = 1;
  spec.s = 1;
  spec.h = 2;
  spec.penalty.kind = PenaltyKind::Basic;
  spec.n_lambda = 5;
  spec.ic_benchmarks = true;
  CvReport report = rolling_cv(data, spec);
  REQUIRE(std::isfinite(report.oos_msfe));
  REQUIRE(report.final_coefficients.direct);
  REQUIRE(report.final_coefficients.h == 2);
  // recursive multi-step is a VAR-only option
  ModelSpec bad = spec;
  bad.recursive = true;
  REQUIRE_THROWS_AS(rolling_cv(data, bad), Error);
}

TEST_CASE("VARX cross-validation with exogenous predictors") {
  const int k = 2, m = 2, T = 80;
  GaussianRng rng(91);
  Matrix xdata = rng.normal_matrix(T, m);
  SeriesMatrix data;
  data.values.resize(T, k + m);
  data.k = k;
  data.m = m;
  data.values.rightCols(m) = xdata;
  // endogenous series driven by lagged exogenous values
  data.values.block(0, 0, 1, k).setZero();
  for (int t = 1; t < T; ++t)
    for (int i = 0; i < k; ++i)
      data.values(t, i) = 0.4 * data.values(t - 1, i) + 0.8 * xdata(t - 1, (i + 1) % m) +
                          0.1 * rng.normal();
  ModelSpec spec;
  spec.k = k;
  spec.m = m;
  spec.p = 1;
  spec.s = 1;
  spec.penalty.kind = PenaltyKind::Lag;
  spec.n_lambda = 6;
  CvReport report = rolling_cv(data, spec);
  REQUIRE(std::isfinite(report.oos_msfe));
  // the informative exogenous block must be active in the final fit
  REQUIRE(report.final_coefficients.beta().cwiseAbs().maxCoeff() > 0.0);
  REQUIRE(report.oos_msfe < report.benchmark_msfe.at("mean"));
}
