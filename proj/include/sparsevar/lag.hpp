#pragma once

#include <Eigen/Dense>

#include <algorithm>

#include "sparsevar/types.hpp"

namespace sparsevar {

enum class HorizonMode { iterated_or_onestep, direct };

/// Compact-notation regression blocks for Y = B Z + U.  Column t of z stacks
/// [1, y'_{tau-d}, ..., y'_{tau-d-p+1}, x'_{tau-d}, ..., x'_{tau-d-s+1}]
/// where tau = offset + t is the 0-based row of the target and d = 1 for
/// one-step/iterated designs, d = h for direct designs.
struct LagRegression {
  Matrix y;  // k x teff
  Matrix z;  // (k*p + m*s + 1) x teff, row 0 all ones
  int teff = 0;
  int offset = 0;  // initial observations consumed
  int delta = 1;
  int k = 0, m = 0, p = 0, s = 0;

  int design_rows() const { return k * p + m * s + 1; }
};

/// Predictor column [1, lags...] for the target at 0-based row `target`,
/// taking lags from `data` with offset `delta`.
inline Vector lag_column(const SeriesMatrix& data, int p, int s, int target, int delta) {
  const int k = data.k, m = data.m;
  Vector col(k * p + m * s + 1);
  col(0) = 1.0;
  for (int ell = 0; ell < p; ++ell)
    col.segment(1 + ell * k, k) = data.values.row(target - delta - ell).head(k).transpose();
  for (int j = 0; j < s; ++j)
    col.segment(1 + k * p + j * m, m) = data.values.row(target - delta - j).tail(m).transpose();
  return col;
}

inline LagRegression build_lag_regression(const SeriesMatrix& data, const ModelSpec& spec,
                                          HorizonMode mode = HorizonMode::iterated_or_onestep) {
  data.validate();
  if (data.k != spec.k || data.m != spec.m)
    fail_data("dimension_mismatch", "data column roles do not match the model spec");
  const int T = data.rows();
  const int delta = mode == HorizonMode::direct ? spec.h : 1;
  const int offset = std::max(spec.p, spec.s) + delta - 1;
  if (T <= offset)
    fail_data("insufficient_data", "series too short for the requested lag structure");

  LagRegression reg;
  reg.k = spec.k;
  reg.m = spec.m;
  reg.p = spec.p;
  reg.s = spec.s;
  reg.delta = delta;
  reg.offset = offset;
  reg.teff = T - offset;
  reg.y.resize(spec.k, reg.teff);
  reg.z.resize(reg.design_rows(), reg.teff);
  for (int t = 0; t < reg.teff; ++t) {
    const int target = offset + t;
    reg.y.col(t) = data.values.row(target).head(spec.k).transpose();
    reg.z.col(t) = lag_column(data, spec.p, spec.s, target, delta);
  }
  return reg;
}

/// Per-column centering/scaling recorded by standardize() so forecasts can be
/// mapped back to raw units.
struct Scaling {
  Vector mean;
  Vector sd;

  Matrix apply(const Matrix& raw) const {
    Matrix out = raw;
    for (int j = 0; j < out.cols(); ++j)
      out.col(j) = (out.col(j).array() - mean(j)) / sd(j);
    return out;
  }
  Matrix invert(const Matrix& scaled) const {
    Matrix out = scaled;
    for (int j = 0; j < out.cols(); ++j)
      out.col(j) = out.col(j).array() * sd(j) + mean(j);
    return out;
  }
};

/// Rescale every column to mean zero and unit variance (population
/// convention: variance divides by T).
inline std::pair<SeriesMatrix, Scaling> standardize(const SeriesMatrix& data) {
  data.validate();
  const int T = data.rows(), n = data.k + data.m;
  Scaling sc;
  sc.mean.resize(n);
  sc.sd.resize(n);
  for (int j = 0; j < n; ++j) {
    sc.mean(j) = data.values.col(j).mean();
    const double var = (data.values.col(j).array() - sc.mean(j)).square().sum() / T;
    if (!(var > 0.0))
      fail_data("zero_variance", "column " + std::to_string(j) + " has zero sample variance");
    sc.sd(j) = std::sqrt(var);
  }
  SeriesMatrix out = data;
  out.values = sc.apply(data.values);
  return {out, sc};
}

inline SeriesMatrix unstandardize(const SeriesMatrix& data, const Scaling& sc) {
  SeriesMatrix out = data;
  out.values = sc.invert(data.values);
  return out;
}

/// Forward Minnesota shift: subtract c_i times the first endogenous lag block
/// from response row i, so the solver shrinks Phi(1) toward diag(c) and
/// everything else toward zero.
inline LagRegression minnesota_shift_forward(const LagRegression& reg,
                                             const std::vector<double>& c) {
  if (static_cast<int>(c.size()) != reg.k)
    fail_data("dimension_mismatch", "C must have length k");
  LagRegression out = reg;
  for (int i = 0; i < reg.k; ++i)
    if (c[i] != 0.0) out.y.row(i) -= c[i] * reg.z.row(1 + i);
  return out;
}

/// Inverse shift: add c_i back to the (i,i) entry of the estimated Phi(1).
inline CoefficientSet minnesota_shift_inverse(const CoefficientSet& fit,
                                              const std::vector<double>& c) {
  if (static_cast<int>(c.size()) != fit.k)
    fail_data("dimension_mismatch", "C must have length k");
  CoefficientSet out = fit;
  for (int i = 0; i < fit.k; ++i) out.b(i, 1 + i) += c[i];
  return out;
}

}  // namespace sparsevar
