#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "sparsevar/lag.hpp"
#include "sparsevar/penalties.hpp"
#include "sparsevar/types.hpp"

namespace sparsevar {

enum class StepRule { fixed_by_lipschitz, backtracking };

struct SolverOptions {
  int max_iter = 10000;
  double tol = 1e-4;  // max relative coefficient change between sweeps
  std::optional<Matrix> warm_start;  // penalized block, k x (k*p+m*s)
  StepRule step_rule = StepRule::fixed_by_lipschitz;  // proximal solvers only
  // when set, receives the objective after every sweep / accepted step
  std::vector<double>* objective_trace = nullptr;

  void validate() const {
    if (max_iter < 1) fail_data("dimension_mismatch", "max_iter must be at least 1");
    if (!(tol > 0.0)) fail_data("dimension_mismatch", "tol must be positive");
  }
};

namespace detail {

/// Response/design with column means removed; the intercept is recovered as
/// nu = ybar - B * zbar after solving the centered problem.
struct CenteredDesign {
  Matrix yt;   // k x teff
  Matrix zt;   // d x teff, d = k*p + m*s
  Vector ybar;
  Vector zbar;
};

inline CenteredDesign center(const LagRegression& reg) {
  CenteredDesign cd;
  const int d = reg.design_rows() - 1;
  cd.ybar = reg.y.rowwise().mean();
  cd.yt = reg.y.colwise() - cd.ybar;
  cd.zbar = reg.z.bottomRows(d).rowwise().mean();
  cd.zt = reg.z.bottomRows(d).colwise() - cd.zbar;
  return cd;
}

inline double relative_change(const Matrix& b_new, const Matrix& b_old) {
  const double scale = b_old.cwiseAbs().maxCoeff();
  const double diff = (b_new - b_old).cwiseAbs().maxCoeff();
  return diff / (scale + 1e-30);
}

/// Largest eigenvalue of zt * zt' by power iteration (deterministic start),
/// inflated slightly so 1/L is a safe proximal step.
inline double lipschitz_constant(const Matrix& zt) {
  const int d = static_cast<int>(zt.rows());
  Matrix g = zt * zt.transpose();
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = 1.0 + static_cast<double>(i) / (d + 1.0);
  v /= v.norm();
  double lam = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vector w = g * v;
    const double n = w.norm();
    if (n <= 0.0) return 0.0;
    w /= n;
    const double lam_new = w.dot(g * w);
    if (std::abs(lam_new - lam) <= 1e-13 * std::max(1.0, lam_new)) {
      lam = lam_new;
      break;
    }
    lam = lam_new;
    v = w;
  }
  return lam * (1.0 + 1e-6);
}

/// Solve sum_j a_j * c^2 / (d_j + c)^2 = tau^2 for c > 0 by bisection.
/// Assumes sum_j a_j > tau^2 (checked by the caller's zero test).
inline double block_scale_root(const Vector& a, const Vector& d, double tau) {
  double s = a.sum();
  const double rs = std::sqrt(s);
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (int j = 0; j < d.size(); ++j) {
    if (a(j) <= 0.0) continue;
    dmin = std::min(dmin, d(j));
    dmax = std::max(dmax, d(j));
  }
  double lo = tau * dmin / (rs - tau);
  double hi = tau * dmax / (rs - tau);
  if (!(hi > 0.0)) return 1e-300;
  auto psi = [&](double c) {
    double val = 0.0;
    for (int j = 0; j < a.size(); ++j) {
      if (a(j) <= 0.0) continue;
      const double r = c / (d(j) + c);
      val += a(j) * r * r;
    }
    return val - tau * tau;
  };
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (psi(mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline double objective_value(const CenteredDesign& cd, const GroupPartition& part, double lambda,
                              double alpha, const Matrix& b) {
  const double rss = (cd.yt - b * cd.zt).squaredNorm();
  return 0.5 * rss + lambda * penalty_weight_sum(part, b, alpha);
}

inline void prox_matrix(Matrix& b, const GroupPartition& part, double tau, double alpha) {
  Eigen::Map<Vector> v(b.data(), b.size());
  Vector vec = v;
  prox_inplace(vec, part, tau, alpha);
  v = vec;
}

// ---------------------------------------------------------------------------
// Coordinate descent for the Basic (elementwise L1) structure.
// ---------------------------------------------------------------------------

inline int coordinate_descent(const CenteredDesign& cd, const GroupPartition& part, double lambda,
                              const SolverOptions& opts, Matrix& b, bool& converged) {
  const int d = static_cast<int>(cd.zt.rows());
  const Matrix g = cd.zt * cd.zt.transpose();
  const Matrix cy = cd.yt * cd.zt.transpose();
  Matrix mg = b * g;
  int it = 0;
  converged = false;
  for (; it < opts.max_iter; ++it) {
    Matrix b_prev = b;
    for (int j = 0; j < d; ++j) {
      const double gjj = g(j, j);
      if (gjj <= 0.0) continue;
      // the k univariate subproblems for column j decouple across rows
      Vector num = cy.col(j) - (mg.col(j) - gjj * b.col(j));
      Vector bj(b.rows());
      for (int i = 0; i < b.rows(); ++i) bj(i) = soft(num(i), lambda) / gjj;
      Vector delta = bj - b.col(j);
      if (delta.cwiseAbs().maxCoeff() > 0.0) {
        mg.noalias() += delta * g.row(j);
        b.col(j) = bj;
      }
    }
    if (!b.allFinite()) fail_numeric("non_finite", "coordinate descent diverged");
    if (opts.objective_trace)
      opts.objective_trace->push_back(objective_value(cd, part, lambda, 0.0, b));
    if (relative_change(b, b_prev) < opts.tol) {
      converged = true;
      ++it;
      break;
    }
  }
  return it;
}

// ---------------------------------------------------------------------------
// Block coordinate descent for Lag / OwnOther groupings.
// ---------------------------------------------------------------------------

/// Cached spectral data for one group's design sub-block.
struct BlockCache {
  enum class Kind { full_cols, diag, off_diag } kind;
  int group_index = 0;
  // full_cols: contiguous design rows [col0, col0+ncols)
  int col0 = 0, ncols = 0;
  Matrix v;   // eigenvectors of the ncols x ncols Gram
  Vector d;   // eigenvalues
  // diag: per-series design row indices and squared norms
  std::vector<int> zrows;
  Vector gamma;
  // off_diag: per residual row, eigendecomposition of the Gram with that
  // series' own design row removed
  std::vector<Matrix> v_per_row;
  std::vector<Vector> d_per_row;
  std::vector<std::vector<int>> zrows_per_row;
};

inline std::vector<BlockCache> build_block_caches(const GroupPartition& part, const Matrix& zt) {
  // group ordering follows build_partition: Lag emits p lag blocks then the
  // exogenous column groups; OwnOther emits (own, other) pairs per lag then
  // the exogenous column groups
  const bool own_other = part.kind == PenaltyKind::OwnOther || part.kind == PenaltyKind::SparseOO;
  const int n_endo_groups = own_other ? 2 * part.p : part.p;
  std::vector<BlockCache> caches;
  const int k = part.k;
  for (int gi = 0; gi < static_cast<int>(part.groups.size()); ++gi) {
    const Group& g = part.groups[gi];
    BlockCache bc;
    bc.group_index = gi;
    const bool endo = gi < n_endo_groups;
    if (!endo || !own_other) {
      // contiguous design rows: a whole Phi(ell) block or one exogenous column
      bc.kind = BlockCache::Kind::full_cols;
      bc.col0 = g.idx.front() / k;
      bc.ncols = static_cast<int>(g.idx.size()) / k;
      Matrix gram = zt.middleRows(bc.col0, bc.ncols) * zt.middleRows(bc.col0, bc.ncols).transpose();
      Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
      bc.v = es.eigenvectors();
      bc.d = es.eigenvalues().cwiseMax(0.0);
    } else if (gi % 2 == 0) {
      // own-lag diagonal group
      bc.kind = BlockCache::Kind::diag;
      bc.gamma.resize(k);
      for (int i = 0; i < k; ++i) {
        const int zrow = g.idx[i] / k;
        bc.zrows.push_back(zrow);
        bc.gamma(i) = zt.row(zrow).squaredNorm();
      }
    } else {
      // off-diagonal group: Gram is block diagonal across residual rows
      bc.kind = BlockCache::Kind::off_diag;
      bc.v_per_row.resize(k);
      bc.d_per_row.resize(k);
      bc.zrows_per_row.resize(k);
      for (int i = 0; i < k; ++i) {
        for (int idx : g.idx)
          if (idx % k == i) bc.zrows_per_row[i].push_back(idx / k);
        const int n = static_cast<int>(bc.zrows_per_row[i].size());
        Matrix gram(n, n);
        for (int a = 0; a < n; ++a)
          for (int b2 = 0; b2 < n; ++b2)
            gram(a, b2) = zt.row(bc.zrows_per_row[i][a]).dot(zt.row(bc.zrows_per_row[i][b2]));
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
        bc.v_per_row[i] = es.eigenvectors();
        bc.d_per_row[i] = es.eigenvalues().cwiseMax(0.0);
      }
    }
    caches.push_back(std::move(bc));
  }
  return caches;
}

inline void bcd_update_full_cols(const BlockCache& bc, const Matrix& zt, double tau, Matrix& b,
                                 Matrix& resid) {
  const auto zc = zt.middleRows(bc.col0, bc.ncols);
  Matrix w_old = b.middleCols(bc.col0, bc.ncols);
  Matrix r_contrib = w_old * zc;
  Matrix mg = (resid + r_contrib) * zc.transpose();  // k x ncols
  const double mnorm = mg.norm();
  Matrix w_new;
  if (mnorm <= tau) {
    w_new = Matrix::Zero(b.rows(), bc.ncols);
  } else {
    Matrix mv = mg * bc.v;
    Vector a(bc.ncols);
    for (int j = 0; j < bc.ncols; ++j) a(j) = mv.col(j).squaredNorm();
    const double c = block_scale_root(a, bc.d, tau);
    for (int j = 0; j < bc.ncols; ++j) mv.col(j) /= (bc.d(j) + c);
    w_new = mv * bc.v.transpose();
  }
  resid.noalias() += r_contrib - w_new * zc;
  b.middleCols(bc.col0, bc.ncols) = w_new;
}

inline void bcd_update_diag(const BlockCache& bc, const Matrix& zt, double tau, Matrix& b,
                            Matrix& resid) {
  const int k = static_cast<int>(b.rows());
  Vector m(k), old(k);
  for (int i = 0; i < k; ++i) {
    old(i) = b(i, bc.zrows[i]);
    m(i) = resid.row(i).dot(zt.row(bc.zrows[i])) + old(i) * bc.gamma(i);
  }
  Vector bnew = Vector::Zero(k);
  if (m.norm() > tau) {
    Vector a = m.cwiseProduct(m);
    const double c = block_scale_root(a, bc.gamma, tau);
    for (int i = 0; i < k; ++i) bnew(i) = m(i) / (bc.gamma(i) + c);
  }
  for (int i = 0; i < k; ++i) {
    const double delta = bnew(i) - old(i);
    if (delta != 0.0) {
      resid.row(i) -= delta * zt.row(bc.zrows[i]);
      b(i, bc.zrows[i]) = bnew(i);
    }
  }
}

inline void bcd_update_off_diag(const BlockCache& bc, const Matrix& zt, double tau, Matrix& b,
                                Matrix& resid) {
  const int k = static_cast<int>(b.rows());
  std::vector<Vector> old(k), mt(k);
  int total = 0;
  for (int i = 0; i < k; ++i) total += static_cast<int>(bc.zrows_per_row[i].size());
  Vector a_all(total), d_all(total);
  int pos = 0;
  for (int i = 0; i < k; ++i) {
    const auto& rows = bc.zrows_per_row[i];
    const int n = static_cast<int>(rows.size());
    Vector m(n);
    old[i].resize(n);
    for (int jidx = 0; jidx < n; ++jidx) old[i](jidx) = b(i, rows[jidx]);
    // Gram * old via the cached eigendecomposition
    Vector gram_old = bc.v_per_row[i] *
                      (bc.d_per_row[i].cwiseProduct(bc.v_per_row[i].transpose() * old[i]));
    for (int jidx = 0; jidx < n; ++jidx)
      m(jidx) = resid.row(i).dot(zt.row(rows[jidx])) + gram_old(jidx);
    mt[i] = bc.v_per_row[i].transpose() * m;
    a_all.segment(pos, n) = mt[i].cwiseProduct(mt[i]);
    d_all.segment(pos, n) = bc.d_per_row[i];
    pos += n;
  }
  std::vector<Vector> bnew(k);
  if (std::sqrt(a_all.sum()) <= tau) {
    for (int i = 0; i < k; ++i) bnew[i] = Vector::Zero(old[i].size());
  } else {
    const double c = block_scale_root(a_all, d_all, tau);
    for (int i = 0; i < k; ++i) {
      Vector scaled = mt[i];
      for (int j = 0; j < scaled.size(); ++j) scaled(j) /= (bc.d_per_row[i](j) + c);
      bnew[i] = bc.v_per_row[i] * scaled;
    }
  }
  for (int i = 0; i < k; ++i) {
    const auto& rows = bc.zrows_per_row[i];
    for (int jidx = 0; jidx < static_cast<int>(rows.size()); ++jidx) {
      const double delta = bnew[i](jidx) - old[i](jidx);
      if (delta != 0.0) {
        resid.row(i) -= delta * zt.row(rows[jidx]);
        b(i, rows[jidx]) = bnew[i](jidx);
      }
    }
  }
}

inline int block_coordinate_descent(const CenteredDesign& cd, const GroupPartition& part,
                                    double lambda, const SolverOptions& opts, Matrix& b,
                                    bool& converged) {
  const std::vector<BlockCache> caches = build_block_caches(part, cd.zt);
  Matrix resid = cd.yt - b * cd.zt;
  int it = 0;
  converged = false;
  for (; it < opts.max_iter; ++it) {
    Matrix b_prev = b;
    for (const BlockCache& bc : caches) {
      const double tau = lambda * part.groups[bc.group_index].weight;
      switch (bc.kind) {
        case BlockCache::Kind::full_cols: bcd_update_full_cols(bc, cd.zt, tau, b, resid); break;
        case BlockCache::Kind::diag: bcd_update_diag(bc, cd.zt, tau, b, resid); break;
        case BlockCache::Kind::off_diag: bcd_update_off_diag(bc, cd.zt, tau, b, resid); break;
      }
    }
    if (!b.allFinite()) fail_numeric("non_finite", "block coordinate descent diverged");
    if (opts.objective_trace)
      opts.objective_trace->push_back(objective_value(cd, part, lambda, 0.0, b));
    if (relative_change(b, b_prev) < opts.tol) {
      converged = true;
      ++it;
      break;
    }
  }
  return it;
}

// ---------------------------------------------------------------------------
// Proximal gradient (sparse-group) and FISTA (nested / tapered) solvers.
// ---------------------------------------------------------------------------

/// Proximal step from `point`, with Armijo-style halving of the step when
/// backtracking is requested.  `step` persists across calls.
inline Matrix proximal_step(const Matrix& point, const Matrix& g, const Matrix& cy,
                            const CenteredDesign& cd, const GroupPartition& part, double lambda,
                            double alpha, StepRule rule, double& step) {
  Matrix grad = point * g - cy;
  if (rule == StepRule::fixed_by_lipschitz) {
    Matrix next = point - step * grad;
    prox_matrix(next, part, step * lambda, alpha);
    return next;
  }
  const double f_point = 0.5 * (cd.yt - point * cd.zt).squaredNorm();
  for (int halving = 0; halving < 60; ++halving) {
    Matrix next = point - step * grad;
    prox_matrix(next, part, step * lambda, alpha);
    Matrix delta = next - point;
    const double f_next = 0.5 * (cd.yt - next * cd.zt).squaredNorm();
    const double quad = f_point + (grad.array() * delta.array()).sum() +
                        delta.squaredNorm() / (2.0 * step);
    if (f_next <= quad + 1e-12 * std::max(1.0, std::abs(quad))) return next;
    step *= 0.5;
  }
  fail_numeric("non_finite", "backtracking line search failed");
}

inline double initial_step(const CenteredDesign& cd, StepRule rule) {
  if (rule == StepRule::fixed_by_lipschitz) {
    const double lip = lipschitz_constant(cd.zt);
    return lip > 0.0 ? 1.0 / lip : 1.0;
  }
  const double dmax = cd.zt.rowwise().squaredNorm().maxCoeff();
  return dmax > 0.0 ? 1.0 / dmax : 1.0;
}

inline int proximal_gradient(const CenteredDesign& cd, const GroupPartition& part, double lambda,
                             double alpha, const SolverOptions& opts, Matrix& b, bool& converged) {
  const Matrix g = cd.zt * cd.zt.transpose();
  const Matrix cy = cd.yt * cd.zt.transpose();
  double step = initial_step(cd, opts.step_rule);
  int it = 0;
  converged = false;
  for (; it < opts.max_iter; ++it) {
    Matrix b_next = proximal_step(b, g, cy, cd, part, lambda, alpha, opts.step_rule, step);
    if (!b_next.allFinite()) fail_numeric("non_finite", "proximal gradient diverged");
    const double rel = relative_change(b_next, b);
    b = b_next;
    if (opts.objective_trace)
      opts.objective_trace->push_back(objective_value(cd, part, lambda, alpha, b));
    if (rel < opts.tol) {
      converged = true;
      ++it;
      break;
    }
  }
  return it;
}

inline int fista(const CenteredDesign& cd, const GroupPartition& part, double lambda, double alpha,
                 const SolverOptions& opts, Matrix& b, bool& converged) {
  const Matrix g = cd.zt * cd.zt.transpose();
  const Matrix cy = cd.yt * cd.zt.transpose();
  double step = initial_step(cd, opts.step_rule);
  Matrix y = b;
  double t = 1.0;
  double f_cur = objective_value(cd, part, lambda, alpha, b);
  int it = 0;
  converged = false;
  for (; it < opts.max_iter; ++it) {
    Matrix b_next = proximal_step(y, g, cy, cd, part, lambda, alpha, opts.step_rule, step);
    double f_next = objective_value(cd, part, lambda, alpha, b_next);
    if (f_next > f_cur) {
      // restart: a plain proximal step from the last iterate cannot increase
      // the objective
      b_next = proximal_step(b, g, cy, cd, part, lambda, alpha, opts.step_rule, step);
      f_next = objective_value(cd, part, lambda, alpha, b_next);
      t = 1.0;
      y = b_next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = b_next + ((t - 1.0) / t_next) * (b_next - b);
      t = t_next;
    }
    if (!b_next.allFinite()) fail_numeric("non_finite", "FISTA diverged");
    const double rel = relative_change(b_next, b);
    f_cur = f_next;
    b = b_next;
    if (opts.objective_trace) opts.objective_trace->push_back(f_cur);
    if (rel < opts.tol) {
      converged = true;
      ++it;
      break;
    }
  }
  return it;
}

}  // namespace detail

/// Minimize 0.5*||Y - B Z||_F^2 + lambda * P(B) for one (lambda, alpha).  The
/// intercept is unpenalized: the problem is solved on the centered design and
/// nu is recovered afterwards.
inline CoefficientSet fit_penalized(const LagRegression& reg, const GroupPartition& part,
                                    double lambda, double alpha, const SolverOptions& opts = {}) {
  opts.validate();
  if (lambda < 0.0) fail_data("dimension_mismatch", "lambda must be nonnegative");
  if (part.k != reg.k || part.p != reg.p || part.m != reg.m || part.s != reg.s)
    fail_data("dimension_mismatch", "partition does not match the regression blocks");
  detail::CenteredDesign cd = detail::center(reg);
  const int d = reg.design_rows() - 1;
  Matrix b = Matrix::Zero(reg.k, d);
  if (opts.warm_start) {
    if (opts.warm_start->rows() != reg.k || opts.warm_start->cols() != d)
      fail_data("dimension_mismatch", "warm start has wrong dimensions");
    b = *opts.warm_start;
  }
  bool converged = true;
  int iters = 0;
  switch (part.kind) {
    case PenaltyKind::Basic:
      iters = detail::coordinate_descent(cd, part, lambda, opts, b, converged);
      break;
    case PenaltyKind::Lag:
    case PenaltyKind::OwnOther:
      iters = detail::block_coordinate_descent(cd, part, lambda, opts, b, converged);
      break;
    case PenaltyKind::SparseLag:
    case PenaltyKind::SparseOO:
      iters = detail::proximal_gradient(cd, part, lambda, alpha, opts, b, converged);
      break;
    case PenaltyKind::EFX:
    case PenaltyKind::HVARC:
    case PenaltyKind::HVAROO:
    case PenaltyKind::HVARELEM:
    case PenaltyKind::Tapered:
      iters = detail::fista(cd, part, lambda, alpha, opts, b, converged);
      break;
  }
  CoefficientSet fit;
  fit.k = reg.k;
  fit.m = reg.m;
  fit.p = reg.p;
  fit.s = reg.s;
  fit.lambda = lambda;
  fit.alpha = alpha;
  fit.converged = converged;
  fit.iterations = iters;
  fit.b.resize(reg.k, d + 1);
  fit.b.col(0) = cd.ybar - b * cd.zbar;
  fit.b.rightCols(d) = b;
  fit.validate();
  return fit;
}

/// Solutions along a descending lambda path, warm-started left to right.
inline std::vector<CoefficientSet> fit_path(const LagRegression& reg, const GroupPartition& part,
                                            const std::vector<double>& lambdas, double alpha,
                                            const SolverOptions& opts = {}) {
  if (lambdas.empty()) fail_data("dimension_mismatch", "empty lambda path");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) fail_data("dimension_mismatch", "path lambdas must be positive");
    if (i > 0 && lambdas[i] >= lambdas[i - 1])
      fail_data("dimension_mismatch", "path lambdas must be strictly descending");
  }
  std::vector<CoefficientSet> fits;
  fits.reserve(lambdas.size());
  SolverOptions o = opts;
  for (double lam : lambdas) {
    CoefficientSet fit = fit_penalized(reg, part, lam, alpha, o);
    o.warm_start = fit.b.rightCols(fit.coef_cols());
    fits.push_back(std::move(fit));
  }
  return fits;
}

}  // namespace sparsevar
