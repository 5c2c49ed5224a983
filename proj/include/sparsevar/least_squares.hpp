#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "sparsevar/analysis.hpp"
#include "sparsevar/lag.hpp"
#include "sparsevar/types.hpp"

namespace sparsevar {

struct LeastSquaresFit {
  Matrix b_hat;       // k x (k*p_used + m*s_used + 1)
  Matrix sigma_u_hat;  // k x k, symmetric PSD
  int p_used = 0;
  int s_used = 0;
  bool rank_deficient = false;
};

namespace detail {

/// QR solve of min ||Y - B Z||_F over B from the stacked matrix
/// K = [Z', Y'], with an epsilon-order ridge for conditioning.  Returns B and
/// the residual Gram R22'R22.
inline bool qr_least_squares(const Matrix& z, const Matrix& y, Matrix& b_hat, Matrix& r22_gram) {
  const int d = static_cast<int>(z.rows());
  const int k = static_cast<int>(y.rows());
  const int n = static_cast<int>(z.cols());
  Matrix kmat(n + d + k, d + k);
  kmat.topLeftCorner(n, d) = z.transpose();
  kmat.topRightCorner(n, k) = y.transpose();
  const double ridge =
      std::numeric_limits<double>::epsilon() * std::max(1.0, kmat.topRows(n).norm());
  kmat.bottomRows(d + k).setZero();
  kmat.bottomRows(d + k).diagonal().setConstant(ridge);

  Eigen::HouseholderQR<Matrix> qr(kmat);
  Matrix r = qr.matrixQR().topRows(d + k).triangularView<Eigen::Upper>();
  const Matrix r11 = r.topLeftCorner(d, d);
  const Matrix r12 = r.topRightCorner(d, k);
  r22_gram = r.bottomRightCorner(k, k).transpose() * r.bottomRightCorner(k, k);
  r22_gram = 0.5 * (r22_gram + r22_gram.transpose());

  const double dmax = r11.diagonal().cwiseAbs().maxCoeff();
  const bool deficient = r11.diagonal().cwiseAbs().minCoeff() <= 1e-12 * std::max(dmax, 1e-300);
  if (deficient) {
    // minimum-norm fallback
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kmat.topLeftCorner(n, d));
    b_hat = cod.solve(y.transpose()).transpose();
    Matrix resid = y - b_hat * z;
    r22_gram = resid * resid.transpose();
    r22_gram = 0.5 * (r22_gram + r22_gram.transpose());
    return true;
  }
  b_hat = r11.triangularView<Eigen::Upper>().solve(r12).transpose();
  return false;
}

}  // namespace detail

/// Least-squares VARX via one QR factorization of [Z', Y']; no explicit
/// matrix inversion.  sigma_u_hat = R22'R22 / teff.
inline LeastSquaresFit varx_fit_qr(const LagRegression& reg) {
  LeastSquaresFit fit;
  fit.p_used = reg.p;
  fit.s_used = reg.s;
  Matrix gram;
  fit.rank_deficient = detail::qr_least_squares(reg.z, reg.y, fit.b_hat, gram);
  fit.sigma_u_hat = gram / reg.teff;
  return fit;
}

inline CoefficientSet to_coefficient_set(const LeastSquaresFit& fit, const LagRegression& reg) {
  CoefficientSet out;
  out.k = reg.k;
  out.m = reg.m;
  out.p = fit.p_used;
  out.s = fit.s_used;
  out.b = fit.b_hat;
  out.validate();
  return out;
}

enum class InfoCriterion { AIC, BIC };

struct OrderSelection {
  int p_hat = 0;
  int s_hat = 0;
  LeastSquaresFit fit;
  Matrix ic_table;  // (p_max+1) x (s_max+1)
};

/// Lag order selection by AIC/BIC minimization over nested column subsets of
/// one common aligned design (so criteria are comparable across candidates).
/// IC(i,j) = logdet(sigma_hat) + penalty(k*(k*i+m*j+1), T - max(i,j)).
inline OrderSelection select_order_ic(const SeriesMatrix& data, int p_max, int s_max,
                                      InfoCriterion criterion) {
  data.validate();
  if (p_max < 0 || s_max < 0) fail_data("dimension_mismatch", "negative maximum order");
  if (data.m == 0 && s_max > 0) fail_data("dimension_mismatch", "s_max > 0 requires exogenous data");
  if (data.m > 0 && s_max < 1) fail_data("dimension_mismatch", "exogenous data requires s_max >= 1");
  const int T = data.rows();
  const int k = data.k, m = data.m;
  const int trim = std::max(std::max(p_max, s_max), 1);
  if (T <= trim + 1) fail_data("insufficient_data", "series too short for order selection");

  // full design at (p_max, s_max); candidates take leading column subsets
  ModelSpec full;
  full.k = k;
  full.m = m;
  full.p = std::max(p_max, 1);
  full.s = s_max;
  LagRegression reg = build_lag_regression(data, full);

  OrderSelection sel;
  sel.ic_table.resize(p_max + 1, s_max + 1);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= p_max; ++i) {
    for (int j = 0; j <= s_max; ++j) {
      Matrix z(1 + k * i + m * j, reg.teff);
      z.topRows(1 + k * i) = reg.z.topRows(1 + k * i);
      if (j > 0) z.bottomRows(m * j) = reg.z.middleRows(1 + k * full.p, m * j);
      Matrix b_hat, gram;
      detail::qr_least_squares(z, reg.y, b_hat, gram);
      Matrix sigma = gram / reg.teff;
      double logdet = 0.0;
      {
        Eigen::PartialPivLU<Matrix> lu(sigma);
        const auto& lum = lu.matrixLU();
        for (int r = 0; r < k; ++r) logdet += std::log(std::max(std::abs(lum(r, r)), 1e-300));
      }
      const int n_par = k * (k * i + m * j + 1);
      const double denom = static_cast<double>(T - std::max(i, j));
      const double pen = criterion == InfoCriterion::AIC
                             ? 2.0 * n_par / denom
                             : std::log(denom) * n_par / denom;
      const double ic = logdet + pen;
      sel.ic_table(i, j) = ic;
      if (ic < best) {
        best = ic;
        sel.p_hat = i;
        sel.s_hat = j;
        sel.fit.b_hat = b_hat;
        sel.fit.sigma_u_hat = sigma;
        sel.fit.p_used = i;
        sel.fit.s_used = j;
      }
    }
  }
  return sel;
}

namespace detail {

/// h-step forecast of the IC-selected least squares VARX from data ending at
/// row `last` (inclusive).  Iterated for VAR, direct design for VARX.
inline Vector ic_forecast_at(const SeriesMatrix& data, int p_max, int s_max,
                             InfoCriterion criterion, int h, int last) {
  SeriesMatrix train;
  train.values = data.values.topRows(last + 1);
  train.k = data.k;
  train.m = data.m;
  OrderSelection sel = select_order_ic(train, p_max, s_max, criterion);
  const int k = data.k, m = data.m;
  const bool var_model = m == 0;
  ModelSpec chosen;
  chosen.k = k;
  chosen.m = m;
  chosen.p = std::max(sel.p_hat, 1);
  chosen.s = sel.s_hat;
  chosen.h = h;
  if (sel.p_hat == 0 && sel.s_hat == 0) {
    // intercept-only model: forecast is the sample mean
    return train.endogenous().colwise().mean().transpose();
  }
  if (var_model || h == 1) {
    LagRegression reg = build_lag_regression(train, chosen);
    LeastSquaresFit fit = varx_fit_qr(reg);
    CoefficientSet coef = to_coefficient_set(fit, reg);
    Matrix fc = forecast(coef, train, h);
    return fc.row(h - 1).transpose();
  }
  // VARX and h > 1: direct design at horizon h
  LagRegression reg = build_lag_regression(train, chosen, HorizonMode::direct);
  LeastSquaresFit fit = varx_fit_qr(reg);
  Vector zcol = lag_column(train, chosen.p, chosen.s, last + h, h);  // lags dated <= last
  return fit.b_hat * zcol;
}

}  // namespace detail

/// Per-origin squared forecast errors of the AIC/BIC least squares benchmark
/// over target rows [first_target, last_target] (0-based, inclusive).
inline std::vector<double> varx_forecast_eval(const SeriesMatrix& data, int p_max, int s_max,
                                              int first_target, int last_target,
                                              InfoCriterion criterion, int h) {
  data.validate();
  if (h < 1) fail_data("dimension_mismatch", "h must be at least 1");
  if (first_target < h || last_target >= data.rows() || first_target > last_target)
    fail_data("insufficient_data", "evaluation window out of range");
  std::vector<double> errors;
  errors.reserve(last_target - first_target + 1);
  for (int target = first_target; target <= last_target; ++target) {
    Vector fc = detail::ic_forecast_at(data, p_max, s_max, criterion, h, target - h);
    Vector truth = data.values.row(target).head(data.k).transpose();
    errors.push_back((fc - truth).squaredNorm());
  }
  return errors;
}

struct NaiveBenchmarks {
  double mean_msfe = 0.0;
  double rw_msfe = 0.0;
};

/// Expanding-window sample-mean and random-walk forecasts over the same
/// target window as varx_forecast_eval.  `skip` drops initialization rows
/// from the mean's window so it averages the same effective sample as a lag
/// model fit on the same slice.
inline NaiveBenchmarks naive_benchmarks(const SeriesMatrix& data, int first_target,
                                        int last_target, int h, int skip = 0) {
  data.validate();
  if (first_target < h || last_target >= data.rows() || first_target > last_target)
    fail_data("insufficient_data", "evaluation window out of range");
  if (skip < 0 || first_target - h - skip < 0)
    fail_data("insufficient_data", "skip exceeds the first training window");
  NaiveBenchmarks out;
  const int n = last_target - first_target + 1;
  for (int target = first_target; target <= last_target; ++target) {
    const int last = target - h;
    Vector truth = data.values.row(target).head(data.k).transpose();
    Vector mean_fc = data.values.middleRows(skip, last + 1 - skip)
                         .leftCols(data.k)
                         .colwise()
                         .mean()
                         .transpose();
    Vector rw_fc = data.values.row(last).head(data.k).transpose();
    out.mean_msfe += (mean_fc - truth).squaredNorm();
    out.rw_msfe += (rw_fc - truth).squaredNorm();
  }
  out.mean_msfe /= n;
  out.rw_msfe /= n;
  return out;
}

}  // namespace sparsevar
