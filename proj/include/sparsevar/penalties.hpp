#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "sparsevar/types.hpp"

namespace sparsevar {

/// One penalty group: flat indices into the penalized coefficient matrix
/// (k rows by k*p+m*s columns, column-major) plus the group weight.
struct Group {
  std::vector<int> idx;
  double weight = 1.0;
};

/// Grouping of the penalized coefficients for one structure.  Disjoint
/// structures populate `groups`; hierarchical structures populate `chains`,
/// each chain ordered outermost group first with every group containing the
/// next one.
struct GroupPartition {
  PenaltyKind kind = PenaltyKind::Basic;
  int k = 0, m = 0, p = 0, s = 0;
  int n_coef = 0;
  std::vector<Group> groups;
  std::vector<std::vector<Group>> chains;

  // flat index of Phi(ell)_{row,col}, ell in [1,p]
  int endo_index(int row, int ell, int col) const { return ((ell - 1) * k + col) * k + row; }
  // flat index of beta(j)_{row,col}, j in [1,s]
  int exog_index(int row, int j, int col) const { return (k * p + (j - 1) * m + col) * k + row; }
};

namespace detail {

inline void append_exog_column_groups(GroupPartition& part) {
  const double w = std::sqrt(static_cast<double>(part.k));
  for (int j = 1; j <= part.s; ++j)
    for (int col = 0; col < part.m; ++col) {
      Group g;
      g.weight = w;
      for (int row = 0; row < part.k; ++row) g.idx.push_back(part.exog_index(row, j, col));
      part.groups.push_back(std::move(g));
    }
}

}  // namespace detail

/// Build the coefficient grouping for the model's penalty structure.
inline GroupPartition build_partition(const ModelSpec& spec) {
  spec.validate();
  GroupPartition part;
  part.kind = spec.penalty.kind;
  part.k = spec.k;
  part.m = spec.m;
  part.p = spec.p;
  part.s = spec.s;
  part.n_coef = spec.k * (spec.k * spec.p + spec.m * spec.s);
  const int k = spec.k, p = spec.p, m = spec.m;

  switch (part.kind) {
    case PenaltyKind::Basic: {
      for (int i = 0; i < part.n_coef; ++i) part.groups.push_back({{i}, 1.0});
      break;
    }
    case PenaltyKind::Tapered: {
      for (int ell = 1; ell <= p; ++ell) {
        const double w = std::pow(static_cast<double>(ell), spec.penalty.gamma);
        for (int col = 0; col < k; ++col)
          for (int row = 0; row < k; ++row)
            part.groups.push_back({{part.endo_index(row, ell, col)}, w});
      }
      break;
    }
    case PenaltyKind::Lag:
    case PenaltyKind::SparseLag: {
      const double w = std::sqrt(static_cast<double>(k) * k);
      for (int ell = 1; ell <= p; ++ell) {
        Group g;
        g.weight = w;
        for (int col = 0; col < k; ++col)
          for (int row = 0; row < k; ++row) g.idx.push_back(part.endo_index(row, ell, col));
        part.groups.push_back(std::move(g));
      }
      detail::append_exog_column_groups(part);
      break;
    }
    case PenaltyKind::OwnOther:
    case PenaltyKind::SparseOO: {
      const double w_on = std::sqrt(static_cast<double>(k));
      const double w_off = std::sqrt(static_cast<double>(k) * (k - 1));
      for (int ell = 1; ell <= p; ++ell) {
        Group on;
        on.weight = w_on;
        for (int i = 0; i < k; ++i) on.idx.push_back(part.endo_index(i, ell, i));
        part.groups.push_back(std::move(on));
        Group off;
        off.weight = w_off;
        for (int col = 0; col < k; ++col)
          for (int row = 0; row < k; ++row)
            if (row != col) off.idx.push_back(part.endo_index(row, ell, col));
        part.groups.push_back(std::move(off));
      }
      detail::append_exog_column_groups(part);
      break;
    }
    case PenaltyKind::EFX: {
      // per lag and per marginal model: [Phi_j, beta_j] with beta_j nested inside
      for (int ell = 1; ell <= p; ++ell)
        for (int row = 0; row < k; ++row) {
          Group outer, inner;
          for (int col = 0; col < k; ++col) outer.idx.push_back(part.endo_index(row, ell, col));
          for (int col = 0; col < m; ++col) {
            outer.idx.push_back(part.exog_index(row, ell, col));
            inner.idx.push_back(part.exog_index(row, ell, col));
          }
          part.chains.push_back({std::move(outer), std::move(inner)});
        }
      break;
    }
    case PenaltyKind::HVARC: {
      for (int row = 0; row < k; ++row) {
        std::vector<Group> chain;
        for (int ell = 1; ell <= p; ++ell) {
          Group g;
          for (int l = ell; l <= p; ++l)
            for (int col = 0; col < k; ++col) g.idx.push_back(part.endo_index(row, l, col));
          chain.push_back(std::move(g));
        }
        part.chains.push_back(std::move(chain));
      }
      break;
    }
    case PenaltyKind::HVAROO: {
      // per row: Phi_i^(ell:p) followed by (Phi_{i,-i}^(ell), Phi_i^((ell+1):p))
      for (int row = 0; row < k; ++row) {
        std::vector<Group> chain;
        for (int ell = 1; ell <= p; ++ell) {
          Group full;
          for (int l = ell; l <= p; ++l)
            for (int col = 0; col < k; ++col) full.idx.push_back(part.endo_index(row, l, col));
          chain.push_back(std::move(full));
          Group other;
          for (int col = 0; col < k; ++col)
            if (col != row) other.idx.push_back(part.endo_index(row, ell, col));
          for (int l = ell + 1; l <= p; ++l)
            for (int col = 0; col < k; ++col) other.idx.push_back(part.endo_index(row, l, col));
          chain.push_back(std::move(other));
        }
        part.chains.push_back(std::move(chain));
      }
      break;
    }
    case PenaltyKind::HVARELEM: {
      for (int row = 0; row < k; ++row)
        for (int col = 0; col < k; ++col) {
          std::vector<Group> chain;
          for (int ell = 1; ell <= p; ++ell) {
            Group g;
            for (int l = ell; l <= p; ++l) g.idx.push_back(part.endo_index(row, l, col));
            chain.push_back(std::move(g));
          }
          part.chains.push_back(std::move(chain));
        }
      break;
    }
  }
  return part;
}

namespace detail {

template <class Vec>
inline double group_norm(const Vec& v, const Group& g) {
  double ss = 0.0;
  for (int i : g.idx) ss += v(i) * v(i);
  return std::sqrt(ss);
}

inline void group_soft_threshold(Vector& v, const Group& g, double tau) {
  const double n = group_norm(v, g);
  if (n <= tau) {
    for (int i : g.idx) v(i) = 0.0;
  } else {
    const double scale = 1.0 - tau / n;
    for (int i : g.idx) v(i) *= scale;
  }
}

inline double soft(double x, double tau) {
  if (x > tau) return x - tau;
  if (x < -tau) return x + tau;
  return 0.0;
}

}  // namespace detail

/// P(B) of the structure, without the lambda factor.  `coef` is the k x
/// (k*p+m*s) penalized block stored column-major.
inline double penalty_weight_sum(const GroupPartition& part, const Matrix& coef, double alpha) {
  Eigen::Map<const Vector> vc(coef.data(), coef.size());
  double val = 0.0;
  switch (part.kind) {
    case PenaltyKind::Basic:
      return vc.lpNorm<1>();
    case PenaltyKind::Tapered:
    case PenaltyKind::Lag:
    case PenaltyKind::OwnOther:
      for (const Group& g : part.groups) val += g.weight * detail::group_norm(vc, g);
      return val;
    case PenaltyKind::SparseLag:
    case PenaltyKind::SparseOO: {
      for (const Group& g : part.groups) val += g.weight * detail::group_norm(vc, g);
      return (1.0 - alpha) * val + alpha * vc.lpNorm<1>();
    }
    case PenaltyKind::EFX:
    case PenaltyKind::HVARC:
    case PenaltyKind::HVAROO:
    case PenaltyKind::HVARELEM:
      for (const auto& chain : part.chains)
        for (const Group& g : chain) val += g.weight * detail::group_norm(vc, g);
      return val;
  }
  return val;
}

/// lambda * (P_y + P_x) evaluated for a fitted coefficient set.
inline double penalty_value(const CoefficientSet& fit, const GroupPartition& part, double lambda,
                            double alpha) {
  if (fit.k != part.k || fit.coef_cols() != part.k * part.p + part.m * part.s)
    fail_data("dimension_mismatch", "coefficients do not match the partition");
  Matrix coef = fit.b.rightCols(fit.coef_cols());
  return lambda * penalty_weight_sum(part, coef, alpha);
}

/// Proximal operator: argmin_u 0.5||u - v||^2 + tau * P(u), evaluated in
/// place.  Hierarchical structures use one sweep of group soft-thresholding
/// from the innermost group outward, which is exact for nested groups.
inline void prox_inplace(Vector& v, const GroupPartition& part, double tau, double alpha) {
  if (tau < 0.0) fail_numeric("dimension_mismatch", "prox threshold must be nonnegative");
  if (tau == 0.0) return;
  switch (part.kind) {
    case PenaltyKind::Basic:
      for (int i = 0; i < v.size(); ++i) v(i) = detail::soft(v(i), tau);
      break;
    case PenaltyKind::Tapered:
    case PenaltyKind::Lag:
    case PenaltyKind::OwnOther:
      for (const Group& g : part.groups) detail::group_soft_threshold(v, g, tau * g.weight);
      break;
    case PenaltyKind::SparseLag:
    case PenaltyKind::SparseOO: {
      const double t1 = tau * alpha;
      for (int i = 0; i < v.size(); ++i) v(i) = detail::soft(v(i), t1);
      for (const Group& g : part.groups)
        detail::group_soft_threshold(v, g, tau * (1.0 - alpha) * g.weight);
      break;
    }
    case PenaltyKind::EFX:
    case PenaltyKind::HVARC:
    case PenaltyKind::HVAROO:
    case PenaltyKind::HVARELEM:
      for (const auto& chain : part.chains)
        for (auto it = chain.rbegin(); it != chain.rend(); ++it)
          detail::group_soft_threshold(v, *it, tau * it->weight);
      break;
  }
}

inline Vector prox(const Vector& v, const GroupPartition& part, double tau, double alpha) {
  Vector out = v;
  prox_inplace(out, part, tau, alpha);
  return out;
}

}  // namespace sparsevar
