#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sparsevar/penalties.hpp"
#include "sparsevar/solvers.hpp"

namespace sparsevar {

/// Upper bound on lambda such that the penalized fit is identically zero.
/// Exact for Basic/Tapered and the disjoint group structures; a coarse bound
/// (tightened by bisect_lambda_max) for sparse-group and nested structures.
inline double theoretical_lambda_max(const LagRegression& reg, const GroupPartition& part,
                                     double alpha) {
  detail::CenteredDesign cd = detail::center(reg);
  Matrix grad = cd.yt * cd.zt.transpose();  // |gradient at zero|, entrywise
  Eigen::Map<const Vector> gv(grad.data(), grad.size());
  Vector gvec = gv;
  double bound = 0.0;
  switch (part.kind) {
    case PenaltyKind::Basic:
      bound = gvec.cwiseAbs().maxCoeff();
      break;
    case PenaltyKind::Tapered:
      for (const Group& g : part.groups)
        bound = std::max(bound, std::abs(gvec(g.idx.front())) / g.weight);
      break;
    case PenaltyKind::Lag:
    case PenaltyKind::OwnOther:
      for (const Group& g : part.groups)
        bound = std::max(bound, detail::group_norm(gvec, g) / g.weight);
      break;
    case PenaltyKind::SparseLag:
    case PenaltyKind::SparseOO: {
      double group_bound = std::numeric_limits<double>::infinity();
      double l1_bound = std::numeric_limits<double>::infinity();
      if (alpha < 1.0) {
        group_bound = 0.0;
        for (const Group& g : part.groups)
          group_bound = std::max(group_bound, detail::group_norm(gvec, g) / ((1.0 - alpha) * g.weight));
      }
      if (alpha > 0.0) l1_bound = gvec.cwiseAbs().maxCoeff() / alpha;
      bound = std::min(group_bound, l1_bound);
      break;
    }
    case PenaltyKind::EFX:
    case PenaltyKind::HVARC:
    case PenaltyKind::HVAROO:
    case PenaltyKind::HVARELEM:
      // the outermost group of each chain can absorb the whole subgradient
      for (const auto& chain : part.chains)
        bound = std::max(bound, detail::group_norm(gvec, chain.front()) / chain.front().weight);
      break;
  }
  // keep strictly above the knife edge so thresholding at the bound cannot
  // leave round-off residue
  return bound * (1.0 + 1e-10);
}

/// Bisection between an all-zero fit and a nonzero fit, narrowing the bracket
/// to eps.  Returns the upper end so the returned value always yields a zero
/// fit.
inline double bisect_lambda_max(const LagRegression& reg, const GroupPartition& part, double alpha,
                                double coarse, double eps, const SolverOptions& opts = {}) {
  if (!(coarse > 0.0)) return coarse;
  auto all_zero = [&](double lam) {
    SolverOptions o = opts;
    o.warm_start.reset();
    CoefficientSet fit = fit_penalized(reg, part, lam, alpha, o);
    return fit.b.rightCols(fit.coef_cols()).cwiseAbs().maxCoeff() == 0.0;
  };
  double high = coarse;
  double low = 0.0;
  while (high - low > eps) {
    const double mid = 0.5 * (high + low);
    if (all_zero(mid))
      high = mid;
    else
      low = mid;
  }
  return high;
}

struct LambdaGrid {
  std::vector<double> values;  // strictly descending, values[0] = lambda_max
  double depth = 0.0;
  double lambda_max = 0.0;
  bool user_supplied = false;
};

/// Log-linear grid from lambda_max down to lambda_max/depth.
inline LambdaGrid build_lambda_grid(double lambda_max, double depth, int n) {
  if (!(lambda_max > 0.0)) lambda_max = 1e-12;  // degenerate (e.g. zero response)
  LambdaGrid grid;
  grid.depth = depth;
  grid.lambda_max = lambda_max;
  grid.values.resize(n);
  if (n == 1) {
    grid.values[0] = lambda_max;
    return grid;
  }
  for (int i = 0; i < n; ++i)
    grid.values[i] = lambda_max * std::pow(1.0 / depth, static_cast<double>(i) / (n - 1));
  return grid;
}

/// Data-driven grid for one (structure, alpha): theoretical bound, tightened
/// by the bisection routine.
inline LambdaGrid lambda_grid_for(const LagRegression& reg, const GroupPartition& part,
                                  double alpha, double depth, int n,
                                  const SolverOptions& opts = {}) {
  const double coarse = theoretical_lambda_max(reg, part, alpha);
  double lmax = coarse;
  if (coarse > 0.0) lmax = bisect_lambda_max(reg, part, alpha, coarse, coarse * 0.005, opts);
  return build_lambda_grid(lmax, depth, n);
}

inline LambdaGrid user_lambda_grid(std::vector<double> lambdas) {
  std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  LambdaGrid grid;
  grid.values = std::move(lambdas);
  grid.lambda_max = grid.values.empty() ? 0.0 : grid.values.front();
  grid.user_supplied = true;
  return grid;
}

}  // namespace sparsevar
