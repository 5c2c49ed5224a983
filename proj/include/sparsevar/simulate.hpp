#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "sparsevar/types.hpp"

namespace sparsevar {

/// Seeded Gaussian stream: mt19937_64 with Box-Muller, so draws are
/// bit-reproducible across platforms and standard library implementations
/// (std::normal_distribution is not portable).
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    // 53-bit mantissa uniform in (0, 1]
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Matrix normal_matrix(int rows, int cols) {
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// kp x kp block companion matrix: top block row [Phi(1) ... Phi(p)],
/// identity blocks on the subdiagonal.
struct CompanionMatrix {
  Matrix a;
  int k = 0, p = 0;
};

inline CompanionMatrix to_companion(const Matrix& phi, int p) {
  const int k = static_cast<int>(phi.rows());
  if (p < 1 || k < 1 || phi.cols() != static_cast<Eigen::Index>(k) * p)
    fail_data("dimension_mismatch", "phi must be k x (k*p) with k, p >= 1");
  CompanionMatrix comp;
  comp.k = k;
  comp.p = p;
  comp.a = Matrix::Zero(k * p, k * p);
  comp.a.topRows(k) = phi;
  if (p > 1) comp.a.block(k, 0, k * (p - 1), k * (p - 1)).setIdentity();
  return comp;
}

struct StationarityCheck {
  bool stationary = false;
  double spectral_radius = 0.0;
};

inline StationarityCheck is_stationary(const CompanionMatrix& comp, double tol = 0.0) {
  Eigen::EigenSolver<Matrix> es(comp.a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    fail_numeric("eigen_failure", "companion eigenvalue computation did not converge");
  StationarityCheck out;
  out.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  out.stationary = out.spectral_radius < 1.0 - tol;
  return out;
}

/// Gaussian VAR(p) realization of length t_out after discarding burn_in
/// initial draws.  Deterministic given the seed.
inline SeriesMatrix simulate_var(const Matrix& phi, const Matrix& sigma_u, int t_out,
                                 int burn_in = 500, std::uint64_t seed = 1) {
  if (t_out < 1 || burn_in < 0) fail_data("dimension_mismatch", "invalid simulation length");
  const int k = static_cast<int>(phi.rows());
  const int p = static_cast<int>(phi.cols()) / std::max(k, 1);
  CompanionMatrix comp = to_companion(phi, p);
  StationarityCheck chk = is_stationary(comp);
  if (!chk.stationary)
    fail_data("not_stationary", "coefficient matrix has spectral radius >= 1");
  if (sigma_u.rows() != k || sigma_u.cols() != k)
    fail_data("dimension_mismatch", "sigma_u must be k x k");
  Eigen::LLT<Matrix> llt(sigma_u);
  if (llt.info() != Eigen::Success)
    fail_data("not_spd", "sigma_u is not positive definite");
  const Matrix chol = llt.matrixL();

  GaussianRng rng(seed);
  Matrix lags = Matrix::Zero(k, p);  // column j = y_{t-1-j}
  Matrix out(t_out, k);
  for (int t = 0; t < burn_in + t_out; ++t) {
    Vector y = chol * rng.normal_vector(k);
    for (int ell = 0; ell < p; ++ell) y += phi.middleCols(ell * k, k) * lags.col(ell);
    for (int ell = p - 1; ell > 0; --ell) lags.col(ell) = lags.col(ell - 1);
    if (p > 0) lags.col(0) = y;
    if (t >= burn_in) out.row(t - burn_in) = y.transpose();
  }
  SeriesMatrix series;
  series.values = out;
  series.k = k;
  series.m = 0;
  return series;
}

/// Simulation scenarios: a fixed sparse stationary VAR_8(4) coefficient
/// matrix and four innovation covariance layouts (two-clique, severely
/// ill-conditioned, scaled identity, dense well-conditioned).
struct SimulationScenarios {
  Matrix phi;            // 8 x 32
  Matrix sigma_cliques;  // block two-clique covariance
  Matrix sigma_ill;      // condition number >= 1e7
  Matrix sigma_scaled;   // 0.1 * I
  Matrix sigma_dense;    // dense, well conditioned
};

inline SimulationScenarios scenario_generators() {
  const int k = 8, p = 4;
  SimulationScenarios sc;

  // sparse coefficient matrix with an unstructured support, rescaled so the
  // companion spectral radius is 0.7
  GaussianRng rng(20240811u);
  Matrix phi = Matrix::Zero(k, k * p);
  for (int j = 0; j < k * p; ++j)
    for (int i = 0; i < k; ++i)
      if (rng.uniform() < 0.18) phi(i, j) = rng.normal();
  for (int i = 0; i < k; ++i)
    if (phi(i, i) == 0.0) phi(i, i) = 0.4;  // keep every series persistent
  double radius = is_stationary(to_companion(phi, p)).spectral_radius;
  const double scale = 0.7 / radius;
  for (int ell = 0; ell < p; ++ell)
    phi.middleCols(ell * k, k) *= std::pow(scale, ell + 1);
  sc.phi = phi;
  radius = is_stationary(to_companion(sc.phi, p)).spectral_radius;
  if (!(std::abs(radius - 0.7) < 1e-6))
    fail_numeric("not_stationary", "scenario coefficient rescaling failed");

  // scenario 1: two cliques {0..3} and {4..7}, zero covariance between them
  sc.sigma_cliques = Matrix::Zero(k, k);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        sc.sigma_cliques(4 * c + i, 4 * c + j) = i == j ? 1.0 : 0.6;

  auto random_orthogonal = [&](std::uint64_t seed) {
    GaussianRng r(seed);
    Eigen::HouseholderQR<Matrix> qr(r.normal_matrix(k, k));
    Matrix q = qr.householderQ();
    return q;
  };

  // scenario 2: eigenvalues assigned so the condition number is ~3.2e7
  {
    Matrix q = random_orthogonal(77u);
    Vector eig(k);
    for (int i = 0; i < k; ++i)
      eig(i) = 10.0 * std::pow(10.0, -7.5 * i / (k - 1.0));
    sc.sigma_ill = q * eig.asDiagonal() * q.transpose();
    sc.sigma_ill = 0.5 * (sc.sigma_ill + sc.sigma_ill.transpose());
    const double cond = eig.maxCoeff() / eig.minCoeff();
    if (!(cond >= 1e7)) fail_numeric("not_spd", "ill-conditioned scenario construction failed");
  }

  sc.sigma_scaled = 0.1 * Matrix::Identity(k, k);

  // scenario 4: dense rotation of moderate eigenvalues
  {
    Matrix q = random_orthogonal(99u);
    Vector eig(k);
    for (int i = 0; i < k; ++i) eig(i) = 0.5 + 1.5 * i / (k - 1.0);
    sc.sigma_dense = q * eig.asDiagonal() * q.transpose();
    sc.sigma_dense = 0.5 * (sc.sigma_dense + sc.sigma_dense.transpose());
    if (sc.sigma_dense.cwiseAbs().minCoeff() <= 1e-4)
      fail_numeric("not_spd", "dense scenario produced a near-zero entry");
  }
  return sc;
}

}  // namespace sparsevar
