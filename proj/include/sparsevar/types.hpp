#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sparsevar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorKind { usage, data, numeric };

/// Library error with a stable machine-readable tag (used by the CLI to
/// map failures onto exit codes and one-line stderr diagnostics).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string tag, const std::string& message)
      : std::runtime_error(message), kind_(kind), tag_(std::move(tag)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& tag() const { return tag_; }

 private:
  ErrorKind kind_;
  std::string tag_;
};

[[noreturn]] inline void fail_data(const std::string& tag, const std::string& msg) {
  throw Error(ErrorKind::data, tag, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& tag, const std::string& msg) {
  throw Error(ErrorKind::numeric, tag, msg);
}

/// Observed multivariate series, rows = time ascending.  The first k columns
/// are endogenous (modeled), the remaining m are exogenous (unmodeled
/// predictors).
struct SeriesMatrix {
  Matrix values;  // T x (k+m)
  int k = 0;
  int m = 0;
  std::vector<std::string> labels;  // optional, size k+m when present

  int rows() const { return static_cast<int>(values.rows()); }

  void validate() const {
    if (values.rows() < 1) fail_data("insufficient_data", "series must contain at least one row");
    if (k < 1) fail_data("dimension_mismatch", "at least one endogenous series required");
    if (m < 0) fail_data("dimension_mismatch", "negative exogenous count");
    if (values.cols() != k + m)
      fail_data("dimension_mismatch", "column count does not equal k+m");
    if (!labels.empty() && static_cast<int>(labels.size()) != k + m)
      fail_data("dimension_mismatch", "label count does not equal k+m");
    if (!values.allFinite())
      fail_data("non_finite", "series contains non-finite values; missing data is not supported");
  }

  auto endogenous() const { return values.leftCols(k); }
  auto exogenous() const { return values.rightCols(m); }
};

enum class PenaltyKind {
  Basic,
  Lag,
  OwnOther,
  SparseLag,
  SparseOO,
  EFX,
  HVARC,
  HVAROO,
  HVARELEM,
  Tapered,
};

inline const char* penalty_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Basic: return "Basic";
    case PenaltyKind::Lag: return "Lag";
    case PenaltyKind::OwnOther: return "OwnOther";
    case PenaltyKind::SparseLag: return "SparseLag";
    case PenaltyKind::SparseOO: return "SparseOO";
    case PenaltyKind::EFX: return "EFX";
    case PenaltyKind::HVARC: return "HVARC";
    case PenaltyKind::HVAROO: return "HVAROO";
    case PenaltyKind::HVARELEM: return "HVARELEM";
    case PenaltyKind::Tapered: return "Tapered";
  }
  return "?";
}

inline PenaltyKind penalty_from_name(const std::string& name) {
  for (PenaltyKind kind :
       {PenaltyKind::Basic, PenaltyKind::Lag, PenaltyKind::OwnOther, PenaltyKind::SparseLag,
        PenaltyKind::SparseOO, PenaltyKind::EFX, PenaltyKind::HVARC, PenaltyKind::HVAROO,
        PenaltyKind::HVARELEM, PenaltyKind::Tapered}) {
    if (name == penalty_name(kind)) return kind;
  }
  throw Error(ErrorKind::usage, "unsupported_structure", "unknown penalty structure: " + name);
}

inline bool is_sparse_group(PenaltyKind kind) {
  return kind == PenaltyKind::SparseLag || kind == PenaltyKind::SparseOO;
}
inline bool is_hierarchical(PenaltyKind kind) {
  return kind == PenaltyKind::EFX || kind == PenaltyKind::HVARC || kind == PenaltyKind::HVAROO ||
         kind == PenaltyKind::HVARELEM;
}
inline bool is_var_only(PenaltyKind kind) {
  return kind == PenaltyKind::HVARC || kind == PenaltyKind::HVAROO ||
         kind == PenaltyKind::HVARELEM || kind == PenaltyKind::Tapered;
}
inline bool supports_univariate(PenaltyKind kind) {
  return kind == PenaltyKind::Basic || kind == PenaltyKind::Lag || kind == PenaltyKind::HVARC;
}

struct PenaltyStructure {
  PenaltyKind kind = PenaltyKind::Basic;
  double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN: use 1/(k+1) default
  double gamma = 0.0;                                       // Tapered only, in [0,1]
};

enum class RefitMode { none, rls, wls, ifgls };

/// Full model configuration.  k and m describe the column roles of the data
/// this model will be fit to; p and s are the endogenous/exogenous maximum
/// lag orders.
struct ModelSpec {
  int k = 1;
  int m = 0;
  int p = 1;
  int s = 0;
  PenaltyStructure penalty;
  double grid_depth = 50.0;
  int n_lambda = 10;
  bool own_lambdas = false;
  std::vector<double> lambdas;  // used when own_lambdas
  int h = 1;
  bool recursive = false;  // iterated multi-step forecasts (VAR only)
  bool mn = false;
  std::vector<double> c;  // length-k 0/1 random-walk targets, requires mn
  std::vector<double> alpha_grid;  // empty: default {1/(k+1)}
  int t1 = 0;  // 0: default floor(T/3), 1-based position
  int t2 = 0;  // 0: default floor(2T/3)
  bool one_se = false;
  bool ic_benchmarks = true;
  RefitMode rvar = RefitMode::none;

  bool is_var() const { return m == 0 && s == 0; }

  double default_alpha() const { return 1.0 / (k + 1); }

  std::vector<double> effective_alpha_grid() const {
    if (!alpha_grid.empty()) return alpha_grid;
    return {default_alpha()};
  }

  int t1_for(int T) const { return t1 > 0 ? t1 : T / 3; }
  int t2_for(int T) const { return t2 > 0 ? t2 : (2 * T) / 3; }

  void validate(int T = 0) const {
    if (k < 1 || m < 0) fail_data("dimension_mismatch", "invalid k/m");
    if (p < 1) fail_data("dimension_mismatch", "p must be at least 1");
    if (s < 0) fail_data("dimension_mismatch", "s must be nonnegative");
    if (m == 0 && s > 0) fail_data("dimension_mismatch", "s > 0 requires exogenous series");
    if (m > 0 && s == 0) fail_data("dimension_mismatch", "exogenous series require s >= 1");
    if (h < 1) fail_data("dimension_mismatch", "h must be at least 1");
    if (grid_depth <= 1.0) fail_data("dimension_mismatch", "grid depth must exceed 1");
    if (n_lambda < 1) fail_data("dimension_mismatch", "n_lambda must be at least 1");
    if (own_lambdas) {
      if (lambdas.empty()) fail_data("dimension_mismatch", "own_lambdas set but no lambdas given");
      for (double l : lambdas)
        if (!(l > 0.0)) fail_data("dimension_mismatch", "user lambdas must be positive");
    }
    for (double a : alpha_grid)
      if (!(a >= 0.0 && a <= 1.0)) fail_data("dimension_mismatch", "alpha values must lie in [0,1]");
    if (penalty.gamma < 0.0 || penalty.gamma > 1.0)
      fail_data("dimension_mismatch", "gamma must lie in [0,1]");
    if (penalty.kind == PenaltyKind::EFX) {
      if (m < 1) fail_data("unsupported_structure", "EFX requires exogenous series");
      if (s != p) fail_data("unsupported_structure", "EFX requires s = p");
    }
    if (is_var_only(penalty.kind) && m > 0)
      fail_data("unsupported_structure",
                std::string(penalty_name(penalty.kind)) + " supports VAR models only");
    if (k == 1 && !supports_univariate(penalty.kind))
      fail_data("unsupported_structure",
                std::string(penalty_name(penalty.kind)) + " has no univariate support");
    if (!c.empty()) {
      if (static_cast<int>(c.size()) != k) fail_data("dimension_mismatch", "C must have length k");
      bool any = false;
      for (double ci : c) {
        if (ci != 0.0 && ci != 1.0) fail_data("dimension_mismatch", "C entries must be 0 or 1");
        any = any || ci != 0.0;
      }
      if (any && !mn) fail_data("dimension_mismatch", "nonzero C requires the MN option");
    }
    if (recursive && !is_var()) fail_data("dimension_mismatch", "recursive forecasts are VAR only");
    if (T > 0) {
      int T1 = t1_for(T), T2 = t2_for(T);
      if (!(1 <= T1 && T1 < T2 && T2 < T))
        fail_data("insufficient_data", "need 1 <= T1 < T2 < T");
    }
  }
};

/// Estimated coefficients B = [nu | Phi(1)..Phi(p) | beta(1)..beta(s)],
/// k x (k*p + m*s + 1).  Column 0 is the unpenalized intercept.
struct CoefficientSet {
  Matrix b;
  double lambda = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  int k = 0, m = 0, p = 0, s = 0;
  int h = 1;
  bool direct = false;  // fitted on an h-step direct design
  bool converged = true;
  int iterations = 0;

  int coef_cols() const { return k * p + m * s; }

  Vector intercept() const { return b.col(0); }
  Eigen::Block<const Matrix> phi() const { return b.block(0, 1, k, k * p); }
  Eigen::Block<const Matrix> phi_lag(int ell) const {  // ell in [1, p]
    return b.block(0, 1 + (ell - 1) * k, k, k);
  }
  Eigen::Block<const Matrix> beta() const { return b.block(0, 1 + k * p, k, m * s); }

  void validate() const {
    if (b.rows() != k || b.cols() != coef_cols() + 1)
      fail_data("dimension_mismatch", "coefficient matrix has inconsistent dimensions");
    if (!b.allFinite()) fail_numeric("non_finite", "coefficient matrix contains non-finite values");
  }
};

}  // namespace sparsevar
