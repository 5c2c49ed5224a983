#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is written directly from the defining formulas and shares
// no solver logic with the code under test.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "sparsevar/penalties.hpp"
#include "sparsevar/simulate.hpp"
#include "sparsevar/types.hpp"

namespace oracles {

using sparsevar::Matrix;
using sparsevar::Vector;

/// Penalty value computed straight from the printed table formulas (not via
/// the group partition machinery).
inline double penalty_direct(const sparsevar::ModelSpec& spec, const Matrix& coef, double alpha) {
  const int k = spec.k, p = spec.p, s = spec.s, m = spec.m;
  auto phi = [&](int ell) { return coef.middleCols((ell - 1) * k, k); };       // ell in [1,p]
  auto beta = [&](int j) { return coef.middleCols(k * p + (j - 1) * m, m); };  // j in [1,s]
  auto exog_cols = [&]() {
    double v = 0.0;
    for (int j = 1; j <= s; ++j)
      for (int i = 0; i < m; ++i) v += std::sqrt(double(k)) * beta(j).col(i).norm();
    return v;
  };
  using sparsevar::PenaltyKind;
  switch (spec.penalty.kind) {
    case PenaltyKind::Basic:
      return coef.cwiseAbs().sum();
    case PenaltyKind::Lag: {
      double v = 0.0;
      for (int ell = 1; ell <= p; ++ell) v += std::sqrt(double(k) * k) * phi(ell).norm();
      return v + exog_cols();
    }
    case PenaltyKind::OwnOther: {
      double v = 0.0;
      for (int ell = 1; ell <= p; ++ell) {
        double on = 0.0, off = 0.0;
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            const double x = phi(ell)(i, j) * phi(ell)(i, j);
            if (i == j)
              on += x;
            else
              off += x;
          }
        v += std::sqrt(double(k)) * std::sqrt(on) +
             std::sqrt(double(k) * (k - 1)) * std::sqrt(off);
      }
      return v + exog_cols();
    }
    case PenaltyKind::SparseLag: {
      sparsevar::ModelSpec plain = spec;
      plain.penalty.kind = PenaltyKind::Lag;
      return (1.0 - alpha) * penalty_direct(plain, coef, alpha) + alpha * coef.cwiseAbs().sum();
    }
    case PenaltyKind::SparseOO: {
      sparsevar::ModelSpec plain = spec;
      plain.penalty.kind = PenaltyKind::OwnOther;
      return (1.0 - alpha) * penalty_direct(plain, coef, alpha) + alpha * coef.cwiseAbs().sum();
    }
    case PenaltyKind::EFX: {
      double v = 0.0;
      for (int ell = 1; ell <= p; ++ell)
        for (int j = 0; j < k; ++j) {
          Vector joint(k + m);
          joint.head(k) = phi(ell).row(j).transpose();
          joint.tail(m) = beta(ell).row(j).transpose();
          v += joint.norm() + beta(ell).row(j).norm();
        }
      return v;
    }
    case PenaltyKind::HVARC: {
      double v = 0.0;
      for (int i = 0; i < k; ++i)
        for (int ell = 1; ell <= p; ++ell) {
          double ss = 0.0;
          for (int l = ell; l <= p; ++l) ss += phi(l).row(i).squaredNorm();
          v += std::sqrt(ss);
        }
      return v;
    }
    case PenaltyKind::HVAROO: {
      double v = 0.0;
      for (int i = 0; i < k; ++i)
        for (int ell = 1; ell <= p; ++ell) {
          double full = 0.0;
          for (int l = ell; l <= p; ++l) full += phi(l).row(i).squaredNorm();
          v += std::sqrt(full);
          double rest = 0.0;
          for (int j = 0; j < k; ++j)
            if (j != i) rest += phi(ell)(i, j) * phi(ell)(i, j);
          for (int l = ell + 1; l <= p; ++l) rest += phi(l).row(i).squaredNorm();
          v += std::sqrt(rest);
        }
      return v;
    }
    case PenaltyKind::HVARELEM: {
      double v = 0.0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          for (int ell = 1; ell <= p; ++ell) {
            double ss = 0.0;
            for (int l = ell; l <= p; ++l) ss += phi(l)(i, j) * phi(l)(i, j);
            v += std::sqrt(ss);
          }
      return v;
    }
    case PenaltyKind::Tapered: {
      double v = 0.0;
      for (int ell = 1; ell <= p; ++ell)
        v += std::pow(double(ell), spec.penalty.gamma) * phi(ell).cwiseAbs().sum();
      return v;
    }
  }
  return 0.0;
}

/// Plain long-run proximal gradient on 0.5||Y - BZ||^2 + lambda*P(B).  Shares
/// only the prox operator with the library (whose correctness has its own
/// brute-force oracle); the iteration and stopping logic are independent of
/// fit_penalized.
inline Matrix ista_reference(const Matrix& yt, const Matrix& zt,
                             const sparsevar::GroupPartition& part, double lambda, double alpha,
                             int max_iter = 200000, double tol = 1e-13) {
  const Matrix g = zt * zt.transpose();
  const Matrix cy = yt * zt.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const double lip = es.eigenvalues().maxCoeff() * (1.0 + 1e-9);
  const double step = lip > 0 ? 1.0 / lip : 1.0;
  Matrix b = Matrix::Zero(yt.rows(), zt.rows());
  for (int it = 0; it < max_iter; ++it) {
    Matrix grad = b * g - cy;
    Matrix b_next = b - step * grad;
    Vector v = Eigen::Map<Vector>(b_next.data(), b_next.size());
    sparsevar::prox_inplace(v, part, step * lambda, alpha);
    Eigen::Map<Vector>(b_next.data(), b_next.size()) = v;
    const double diff = (b_next - b).cwiseAbs().maxCoeff();
    b = b_next;
    if (diff < tol) break;
  }
  return b;
}

inline double objective(const Matrix& yt, const Matrix& zt, const sparsevar::ModelSpec& spec,
                        double lambda, double alpha, const Matrix& b) {
  return 0.5 * (yt - b * zt).squaredNorm() + lambda * penalty_direct(spec, b, alpha);
}

/// Multi-resolution grid search for the prox of a small nested problem:
/// argmin 0.5||u-v||^2 + tau * sum of tail-group norms.
inline Vector nested_prox_grid_search(const Vector& v, double tau) {
  const int n = static_cast<int>(v.size());
  auto value = [&](const Vector& u) {
    double val = 0.5 * (u - v).squaredNorm();
    for (int ell = 0; ell < n; ++ell) val += tau * u.tail(n - ell).norm();
    return val;
  };
  Vector center = Vector::Zero(n);
  double width = 2.0 * std::max(1.0, v.cwiseAbs().maxCoeff());
  Vector best = center;
  double best_val = value(best);
  const int steps = 20;
  for (int level = 0; level < 8; ++level) {
    Vector lo = center.array() - width;
    std::vector<int> counter(n, 0);
    while (true) {
      Vector u(n);
      for (int i = 0; i < n; ++i) u(i) = lo(i) + 2.0 * width * counter[i] / steps;
      const double val = value(u);
      if (val < best_val) {
        best_val = val;
        best = u;
      }
      int pos = 0;
      while (pos < n && ++counter[pos] > steps) counter[pos++] = 0;
      if (pos == n) break;
    }
    center = best;
    width = 4.0 * width / steps;
  }
  return best;
}

/// Dense relaxed GLS of the restricted VAR via explicit Kronecker algebra:
/// vec(B) = R [R'(ZZ' (x) S^{-1})R]^{-1} R'(Z (x) S^{-1}) vec(Y).
inline Matrix dense_fgls(const Matrix& y, const Matrix& z,
                         const std::vector<std::vector<int>>& active, const Matrix& sigma) {
  const int k = static_cast<int>(y.rows());
  const int d = static_cast<int>(z.rows());
  std::vector<int> flat;  // column-major vec indices: col * k + row
  for (int row = 0; row < k; ++row)
    for (int col : active[row]) flat.push_back(col * k + row);
  std::sort(flat.begin(), flat.end());
  const int r = static_cast<int>(flat.size());
  Matrix sel = Matrix::Zero(k * d, r);
  for (int j = 0; j < r; ++j) sel(flat[j], j) = 1.0;

  const Matrix sinv = sigma.inverse();
  const Matrix zz = z * z.transpose();
  Matrix big(k * d, k * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) big.block(a * k, b * k, k, k) = zz(a, b) * sinv;
  Matrix rhs_op(k * d, static_cast<int>(z.cols()) * k);
  for (int a = 0; a < d; ++a)
    for (int t = 0; t < z.cols(); ++t) rhs_op.block(a * k, t * k, k, k) = z(a, t) * sinv;
  Vector yvec(static_cast<Eigen::Index>(y.cols()) * k);
  for (int t = 0; t < y.cols(); ++t) yvec.segment(t * k, k) = y.col(t);
  Matrix reduced = sel.transpose() * big * sel;
  Vector rhs = sel.transpose() * (rhs_op * yvec);
  Vector phi = reduced.ldlt().solve(rhs);
  Vector full = sel * phi;
  Matrix out(k, d);
  for (int col = 0; col < d; ++col) out.col(col) = full.segment(col * k, k);
  return out;
}

/// VAR(2) with a strong, clearly identifiable second lag (radius ~0.7).
inline Matrix identifiable_var2(int k, std::uint64_t seed) {
  sparsevar::GaussianRng rng(seed);
  Matrix phi(k, 2 * k);
  phi.leftCols(k) = 0.1 * rng.normal_matrix(k, k) / std::sqrt(double(k));
  phi.rightCols(k) = 0.5 * Matrix::Identity(k, k) + 0.05 * rng.normal_matrix(k, k);
  const double rho = sparsevar::is_stationary(sparsevar::to_companion(phi, 2)).spectral_radius;
  const double c = 0.7 / rho;
  phi.leftCols(k) *= c;
  phi.rightCols(k) *= c * c;
  return phi;
}

/// Stationary random VAR coefficients with the requested spectral radius.
inline Matrix random_stationary_var(int k, int p, double radius, std::uint64_t seed,
                                    double density = 1.0) {
  sparsevar::GaussianRng rng(seed);
  Matrix phi(k, k * p);
  for (int j = 0; j < k * p; ++j)
    for (int i = 0; i < k; ++i)
      phi(i, j) = (density >= 1.0 || rng.uniform() < density) ? rng.normal() : 0.0;
  const double rho =
      sparsevar::is_stationary(sparsevar::to_companion(phi, p)).spectral_radius;
  const double scale = radius / std::max(rho, 1e-12);
  for (int ell = 0; ell < p; ++ell) phi.middleCols(ell * k, k) *= std::pow(scale, ell + 1);
  return phi;
}

}  // namespace oracles
