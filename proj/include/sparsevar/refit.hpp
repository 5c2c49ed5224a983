#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "sparsevar/least_squares.hpp"
#include "sparsevar/types.hpp"

namespace sparsevar {

/// Support of a penalized VAR fit: per-row active column indices into the
/// [intercept | Phi] design (0 = intercept, 1..k*p = endogenous lags).
struct RestrictionMap {
  int k = 0;
  int d = 0;  // k*p + 1
  std::vector<std::vector<int>> active;

  int total() const {
    int r = 0;
    for (const auto& row : active) r += static_cast<int>(row.size());
    return r;
  }

  void validate() const {
    if (static_cast<int>(active.size()) != k)
      fail_data("dimension_mismatch", "restriction map must have k rows");
    for (const auto& row : active)
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] < 0 || row[j] >= d)
          fail_data("dimension_mismatch", "active index out of range");
        if (j > 0 && row[j] <= row[j - 1])
          fail_data("dimension_mismatch", "active indices must be strictly increasing");
      }
    if (total() < 1) fail_data("empty_support", "restriction map selects no coefficients");
  }
};

/// Coefficients with magnitude above eps1 form the support; the intercept is
/// always retained unless disabled.
inline RestrictionMap restriction_from_fit(const CoefficientSet& fit, double eps1 = 0.0,
                                           bool include_intercept = true) {
  fit.validate();
  if (eps1 < 0.0) fail_data("dimension_mismatch", "eps1 must be nonnegative");
  if (fit.m > 0 || fit.s > 0)
    fail_data("non_var_model", "refitting restricts VAR coefficients only");
  RestrictionMap map;
  map.k = fit.k;
  map.d = fit.k * fit.p + 1;
  map.active.resize(fit.k);
  for (int i = 0; i < fit.k; ++i) {
    if (include_intercept) map.active[i].push_back(0);
    for (int col = 1; col < map.d; ++col)
      if (std::abs(fit.b(i, col)) > eps1) map.active[i].push_back(col);
  }
  map.validate();
  return map;
}

namespace detail {

inline void check_refit_inputs(const LagRegression& reg, const RestrictionMap& map) {
  if (reg.m > 0 || reg.s > 0) fail_data("non_var_model", "refitting supports VAR designs only");
  if (map.k != reg.k || map.d != reg.design_rows())
    fail_data("dimension_mismatch", "restriction map does not match the regression");
  map.validate();
}

inline Matrix active_design(const LagRegression& reg, const std::vector<int>& cols) {
  Matrix z(cols.size(), reg.teff);
  for (std::size_t j = 0; j < cols.size(); ++j) z.row(j) = reg.z.row(cols[j]);
  return z;
}

inline CoefficientSet scatter_rows(const LagRegression& reg, const RestrictionMap& map,
                                   const std::vector<Vector>& rows) {
  CoefficientSet out;
  out.k = reg.k;
  out.m = 0;
  out.p = reg.p;
  out.s = 0;
  out.b = Matrix::Zero(reg.k, map.d);
  for (int i = 0; i < reg.k; ++i)
    for (std::size_t j = 0; j < map.active[i].size(); ++j)
      out.b(i, map.active[i][j]) = rows[i](j);
  out.validate();
  return out;
}

}  // namespace detail

/// Restricted least squares with identity covariance: the rows decouple, so
/// each marginal model is refit on its own active columns.
inline CoefficientSet relaxed_ls(const LagRegression& reg, const RestrictionMap& map) {
  detail::check_refit_inputs(reg, map);
  std::vector<Vector> rows(reg.k);
  for (int i = 0; i < reg.k; ++i) {
    if (map.active[i].empty()) {
      rows[i] = Vector();
      continue;
    }
    if (static_cast<int>(map.active[i].size()) >= reg.teff)
      fail_data("insufficient_data", "row support size must stay below teff");
    Matrix z = detail::active_design(reg, map.active[i]);
    Matrix y = reg.y.row(i);
    Matrix b_hat, gram;
    detail::qr_least_squares(z, y, b_hat, gram);
    rows[i] = b_hat.row(0).transpose();
  }
  return detail::scatter_rows(reg, map, rows);
}

/// FGLS with a diagonal covariance.  The row-wise scaling cancels, so this
/// coincides with relaxed_ls; it exists to mirror the weighted comparator and
/// to validate that equivalence.
inline CoefficientSet weighted_relaxed_ls(const LagRegression& reg, const RestrictionMap& map,
                                          const Vector& variances) {
  detail::check_refit_inputs(reg, map);
  if (variances.size() != reg.k) fail_data("dimension_mismatch", "need one variance per series");
  for (int i = 0; i < reg.k; ++i)
    if (!(variances(i) > 0.0)) fail_data("not_spd", "variances must be positive");
  std::vector<Vector> rows(reg.k);
  for (int i = 0; i < reg.k; ++i) {
    if (map.active[i].empty()) {
      rows[i] = Vector();
      continue;
    }
    const double w = 1.0 / std::sqrt(variances(i));
    Matrix z = detail::active_design(reg, map.active[i]) * w;
    Matrix y = reg.y.row(i) * w;
    Matrix b_hat, gram;
    detail::qr_least_squares(z, y, b_hat, gram);
    rows[i] = b_hat.row(0).transpose();
  }
  return detail::scatter_rows(reg, map, rows);
}

namespace detail {

/// Per-series thin QR factors of Z' R_i plus orthogonal completions, and the
/// rotated responses.
struct GlsWorkspace {
  std::vector<Matrix> q_thin;  // T x r_i
  std::vector<Matrix> q_comp;  // T x (T - r_i)
  std::vector<Matrix> r_thin;  // r_i x r_i, upper triangular
  std::vector<int> r_sizes;
  Vector y_tilde;  // length r, per-series blocks
  Vector y_hat;    // length k*T - r
  int r = 0;
  int T = 0;
  int k = 0;
};

inline GlsWorkspace build_gls_workspace(const LagRegression& reg, const RestrictionMap& map) {
  GlsWorkspace ws;
  ws.k = reg.k;
  ws.T = reg.teff;
  ws.r = map.total();
  ws.q_thin.resize(reg.k);
  ws.q_comp.resize(reg.k);
  ws.r_thin.resize(reg.k);
  ws.y_tilde.resize(ws.r);
  ws.y_hat.resize(reg.k * ws.T - ws.r);
  int tpos = 0, hpos = 0;
  for (int i = 0; i < reg.k; ++i) {
    const int ri = static_cast<int>(map.active[i].size());
    ws.r_sizes.push_back(ri);
    if (ri >= ws.T) fail_data("insufficient_data", "row support must stay below sample length");
    if (ri == 0) {
      ws.q_thin[i] = Matrix::Zero(ws.T, 0);
      ws.q_comp[i] = Matrix::Identity(ws.T, ws.T);
      ws.r_thin[i] = Matrix::Zero(0, 0);
    } else {
      Matrix x = active_design(reg, map.active[i]).transpose();  // T x r_i
      Eigen::HouseholderQR<Matrix> qr(x);
      Matrix q = qr.householderQ();
      ws.q_thin[i] = q.leftCols(ri);
      ws.q_comp[i] = q.rightCols(ws.T - ri);
      ws.r_thin[i] = qr.matrixQR().topRows(ri).triangularView<Eigen::Upper>();
    }
    Vector yi = reg.y.row(i).transpose();
    ws.y_tilde.segment(tpos, ri) = ws.q_thin[i].transpose() * yi;
    ws.y_hat.segment(hpos, ws.T - ri) = ws.q_comp[i].transpose() * yi;
    tpos += ri;
    hpos += ws.T - ri;
  }
  return ws;
}

/// RQ-style factorization of a wide matrix: A * ptilde = [0 | U] with U
/// upper triangular and ptilde orthogonal, computed from the QR
/// factorization of A' with the rows of A reversed.
inline void rq_wide(const Matrix& a, Matrix& u, Matrix& ptilde) {
  const int q = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  Matrix b = a.colwise().reverse().transpose();  // n x q
  Eigen::HouseholderQR<Matrix> qr(b);
  Matrix rf = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  // U = reverse rows and columns of rf'
  u = rf.transpose().colwise().reverse().rowwise().reverse();
  ptilde = qr.householderQ();
  ptilde = ptilde.rowwise().reverse().eval();
  (void)n;
}

inline Matrix lower_cholesky(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // SVD route for indefinite/singular updates: factor through the
  // eigendecomposition, then take C as R' from the QR of D^{1/2} U'
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix m = d.asDiagonal() * es.eigenvectors().transpose();
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix r = qr.matrixQR().topRows(sigma.rows()).triangularView<Eigen::Upper>();
  return r.transpose();
}

inline double operator_norm(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

struct IfglsResult {
  CoefficientSet coefficients;
  Matrix sigma_hat;
  bool converged = true;
  int iterations = 0;
};

/// Iterated feasible GLS on the selected support, solved as a generalized
/// linear least squares problem through the per-series QR factors and the RQ
/// factorization of the rotated covariance blocks.  No explicit matrix
/// inversion is performed at any step.
inline IfglsResult ifgls(const LagRegression& reg, const RestrictionMap& map, const Matrix& sigma0,
                         double eps2 = 1e-4, int max_iter = 25, bool update_sigma = true) {
  detail::check_refit_inputs(reg, map);
  if (sigma0.rows() != reg.k || sigma0.cols() != reg.k)
    fail_data("dimension_mismatch", "sigma0 must be k x k");
  detail::GlsWorkspace ws = detail::build_gls_workspace(reg, map);
  const int k = ws.k, T = ws.T, r = ws.r;
  const int nc = k * T - r;

  std::vector<int> thin_off(k), comp_off(k);
  for (int i = 0, t = 0, h = 0; i < k; ++i) {
    thin_off[i] = t;
    comp_off[i] = h;
    t += ws.r_sizes[i];
    h += T - ws.r_sizes[i];
  }

  Matrix sigma = 0.5 * (sigma0 + sigma0.transpose());
  Matrix c = detail::lower_cholesky(sigma);
  IfglsResult res;
  Vector phi(r);

  for (int it = 1; it <= max_iter; ++it) {
    res.iterations = it;
    // rotated covariance blocks, assembled from the closed forms instead of
    // forming Q' (C x I) Q
    Matrix bottom(nc, k * T);
    bottom.setZero();
    Matrix top(r, k * T);
    top.setZero();
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double cij = c(i, j);
        if (cij == 0.0) continue;
        bottom.block(comp_off[i], thin_off[j], T - ws.r_sizes[i], ws.r_sizes[j]) =
            cij * (ws.q_comp[i].transpose() * ws.q_thin[j]);
        bottom.block(comp_off[i], r + comp_off[j], T - ws.r_sizes[i], T - ws.r_sizes[j]) =
            cij * (ws.q_comp[i].transpose() * ws.q_comp[j]);
        top.block(thin_off[i], thin_off[j], ws.r_sizes[i], ws.r_sizes[j]) =
            cij * (ws.q_thin[i].transpose() * ws.q_thin[j]);
        top.block(thin_off[i], r + comp_off[j], ws.r_sizes[i], T - ws.r_sizes[j]) =
            cij * (ws.q_thin[i].transpose() * ws.q_comp[j]);
      }
    }
    Matrix w22, ptilde;
    detail::rq_wide(bottom, w22, ptilde);
    const double wmax = w22.diagonal().cwiseAbs().maxCoeff();
    if (w22.diagonal().cwiseAbs().minCoeff() <= 1e-12 * std::max(wmax, 1e-300))
      fail_numeric("singular_w22",
                   "W22 is numerically singular at iteration " + std::to_string(it));
    Vector vhat = w22.triangularView<Eigen::Upper>().solve(ws.y_hat);
    Matrix w12 = (top * ptilde).rightCols(nc);
    Vector vstar = w12 * vhat;
    for (int i = 0; i < k; ++i) {
      const int ri = ws.r_sizes[i];
      if (ri == 0) continue;
      phi.segment(thin_off[i], ri) = ws.r_thin[i].triangularView<Eigen::Upper>().solve(
          ws.y_tilde.segment(thin_off[i], ri) - vstar.segment(thin_off[i], ri));
    }
    if (!update_sigma) {
      res.sigma_hat = sigma;
      break;
    }
    // residual update in the rotated coordinates, lifted back to T-space
    Matrix u_lift = Matrix::Zero(T, k), yhat_lift = Matrix::Zero(T, k);
    for (int i = 0; i < k; ++i) {
      const int ri = ws.r_sizes[i];
      if (ri > 0) {
        Vector ut = ws.y_tilde.segment(thin_off[i], ri) -
                    ws.r_thin[i].triangularView<Eigen::Upper>() * phi.segment(thin_off[i], ri);
        u_lift.col(i) = ws.q_thin[i] * ut;
      }
      yhat_lift.col(i) = ws.q_comp[i] * ws.y_hat.segment(comp_off[i], T - ri);
    }
    const double denom = std::max(1, T - reg.p * k);
    Matrix sigma_next = (u_lift.transpose() * u_lift + yhat_lift.transpose() * yhat_lift) / denom;
    sigma_next = 0.5 * (sigma_next + sigma_next.transpose());
    const double delta = detail::operator_norm(sigma_next - sigma);
    sigma = sigma_next;
    res.sigma_hat = sigma;
    if (delta <= eps2) break;
    if (it == max_iter) {
      res.converged = false;
      break;
    }
    c = detail::lower_cholesky(sigma);
  }

  std::vector<Vector> rows(k);
  for (int i = 0; i < k; ++i) {
    rows[i] = Vector(ws.r_sizes[i]);
    if (ws.r_sizes[i] > 0) rows[i] = phi.segment(thin_off[i], ws.r_sizes[i]);
  }
  res.coefficients = detail::scatter_rows(reg, map, rows);
  return res;
}

/// GLS at a known innovation covariance: a single IFGLS pass without the
/// covariance update.
inline CoefficientSet oracle_gls(const LagRegression& reg, const RestrictionMap& map,
                                 const Matrix& sigma_true) {
  return ifgls(reg, map, sigma_true, 0.0, 1, /*update_sigma=*/false).coefficients;
}

}  // namespace sparsevar
