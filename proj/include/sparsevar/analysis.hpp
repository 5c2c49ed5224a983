#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "sparsevar/lag.hpp"
#include "sparsevar/simulate.hpp"
#include "sparsevar/types.hpp"

namespace sparsevar {

/// Iterated forecasts from the end of `history`.  VAR forecasts recurse on
/// their own predictions; VARX recursion additionally needs `newx` rows
/// (future exogenous observations, one row per step ahead).
inline Matrix forecast(const CoefficientSet& fit, const SeriesMatrix& history, int n_ahead,
                       const Matrix& newx = Matrix()) {
  fit.validate();
  history.validate();
  if (history.k != fit.k || history.m != fit.m)
    fail_data("dimension_mismatch", "history column roles do not match the model");
  if (n_ahead < 1) fail_data("dimension_mismatch", "n_ahead must be at least 1");
  const int T = history.rows();
  const int need = std::max(fit.p, fit.s);
  if (T < need) fail_data("insufficient_history", "history shorter than max(p, s)");
  if (fit.m > 0 && n_ahead > 1 &&
      (newx.rows() < n_ahead || newx.cols() != fit.m))
    fail_data("missing_exogenous_futures",
              "multi-step VARX forecasts need n_ahead future exogenous rows");
  if (fit.m > 0 && n_ahead == 1 && newx.size() > 0 && newx.cols() != fit.m)
    fail_data("dimension_mismatch", "newx must have m columns");

  Matrix out(n_ahead, fit.k);
  // y value at forecast-relative index t (t < 0: observed history)
  auto y_at = [&](int t) -> Vector {
    if (t < 0) return history.values.row(T + t).head(fit.k).transpose();
    return out.row(t).head(fit.k).transpose();
  };
  auto x_at = [&](int t) -> Vector {
    if (t < 0) return history.values.row(T + t).tail(fit.m).transpose();
    return newx.row(t).transpose();
  };
  Vector z(fit.coef_cols() + 1);
  for (int step = 0; step < n_ahead; ++step) {
    z(0) = 1.0;
    for (int ell = 1; ell <= fit.p; ++ell) z.segment(1 + (ell - 1) * fit.k, fit.k) = y_at(step - ell);
    for (int j = 1; j <= fit.s; ++j)
      z.segment(1 + fit.k * fit.p + (j - 1) * fit.m, fit.m) = x_at(step - j);
    out.row(step) = (fit.b * z).transpose();
  }
  return out;
}

/// Orthogonalized impulse responses Theta_i = Gamma_i * C for horizons
/// 0..n_periods-1, where Gamma_i = J A^i J' and C is the lower Cholesky
/// factor of sigma_u.  With unit_variance_shocks the factor is rescaled to
/// W = C D^{-1} so each shock has unit impact variance.
struct IrfResult {
  Matrix responses;  // n_periods x k
  bool stationary = true;
  double spectral_radius = 0.0;
};

inline IrfResult generate_irf(const CoefficientSet& fit, const Matrix& sigma_u, int shock_series,
                              double shock_size, int n_periods,
                              bool unit_variance_shocks = false) {
  fit.validate();
  if (fit.m > 0 || fit.s > 0)
    fail_data("non_var_model", "impulse responses require a pure VAR model");
  if (shock_series < 0 || shock_series >= fit.k)
    fail_data("dimension_mismatch", "shock series out of range");
  if (n_periods < 1) fail_data("dimension_mismatch", "n_periods must be at least 1");
  Eigen::LLT<Matrix> llt(sigma_u);
  if (llt.info() != Eigen::Success) fail_data("not_spd", "sigma_u is not positive definite");
  Matrix c = llt.matrixL();
  if (unit_variance_shocks) {
    Vector d = c.diagonal();
    for (int j = 0; j < fit.k; ++j) c.col(j) /= d(j);
  }

  CompanionMatrix comp = to_companion(fit.phi(), fit.p);
  IrfResult res;
  StationarityCheck chk = is_stationary(comp);
  res.stationary = chk.stationary;
  res.spectral_radius = chk.spectral_radius;

  Vector shock = Vector::Zero(fit.k);
  shock(shock_series) = shock_size;
  const Vector impact = c * shock;
  res.responses.resize(n_periods, fit.k);
  // power = A^i J', maintained incrementally; Gamma_i is its top k x k block
  Matrix power = Matrix::Zero(fit.k * fit.p, fit.k);
  power.topRows(fit.k).setIdentity();
  for (int i = 0; i < n_periods; ++i) {
    res.responses.row(i) = (power.topRows(fit.k) * impact).transpose();
    power = comp.a * power;
  }
  return res;
}

/// Machine-readable plot data for the CV report.
enum class GridPosition { interior, at_min_boundary, at_max_boundary };

inline const char* grid_position_name(GridPosition pos) {
  switch (pos) {
    case GridPosition::interior: return "interior";
    case GridPosition::at_min_boundary: return "at_min_boundary";
    case GridPosition::at_max_boundary: return "at_max_boundary";
  }
  return "?";
}

struct LambdaCurvePoint {
  double lambda = 0.0;
  double msfe = 0.0;
  double se = 0.0;
};

struct DiagnosticsExport {
  Matrix sparsity_grid;  // signed magnitudes of [Phi, beta], k x (kp+ms)
  std::vector<LambdaCurvePoint> lambda_curve;
  GridPosition grid_position = GridPosition::interior;
};

}  // namespace sparsevar
