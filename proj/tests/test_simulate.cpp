#include <catch2/catch_amalgamated.hpp>

#include "sparsevar/simulate.hpp"

using namespace sparsevar;

TEST_CASE("companion form layout") {
  SECTION("p = 1 is the coefficient matrix itself") {
    Matrix phi = Matrix::Random(3, 3);
    CompanionMatrix comp = to_companion(phi, 1);
    REQUIRE((comp.a - phi).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("bundled VAR_3(3) generator fills a 9x9 companion") {
    Matrix phi(3, 9);
    phi << -0.29, 0.00, 0.0, -0.62, 0.00, 0.00, -0.49, 0.00, 0.00,
           -0.26, -0.20, 0.0, -0.77, -0.36, 0.00, -1.24, -0.07, 0.00,
           -0.66, 0.75, 1.3, 0.30, -0.40, -0.44, 0.36, 0.05, 0.03;
    CompanionMatrix comp = to_companion(phi, 3);
    REQUIRE(comp.a.rows() == 9);
    REQUIRE((comp.a.topRows(3) - phi).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((comp.a.block(3, 0, 6, 6) - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((comp.a.block(3, 6, 6, 3)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(is_stationary(comp).stationary);
  }
  SECTION("zero coefficients give a nilpotent companion") {
    Matrix phi = Matrix::Zero(2, 4);
    StationarityCheck chk = is_stationary(to_companion(phi, 2));
    REQUIRE(chk.spectral_radius < 1e-12);
    REQUIRE(chk.stationary);
  }
}

TEST_CASE("stationarity checks") {
  SECTION("identity Phi(1) has radius one") {
    StationarityCheck chk = is_stationary(to_companion(Matrix::Identity(3, 3), 1));
    REQUIRE(chk.spectral_radius == Catch::Approx(1.0));
    REQUIRE_FALSE(chk.stationary);
  }
  SECTION("strictly lower triangular Phi is stationary for any magnitude") {
    Matrix phi = Matrix::Zero(2, 2);
    phi(1, 0) = 1e6;
    StationarityCheck chk = is_stationary(to_companion(phi, 1));
    REQUIRE(chk.spectral_radius < 1e-6);
    REQUIRE(chk.stationary);
  }
  SECTION("scaled identity radius") {
    StationarityCheck chk = is_stationary(to_companion(0.5 * Matrix::Identity(4, 4), 1));
    REQUIRE(chk.spectral_radius == Catch::Approx(0.5));
  }
}

TEST_CASE("simulation moments") {
  SECTION("near-zero innovation variance collapses the path") {
    Matrix phi = 0.5 * Matrix::Identity(2, 2);
    SeriesMatrix out = simulate_var(phi, 1e-20 * Matrix::Identity(2, 2), 200, 100, 3);
    REQUIRE(out.values.cwiseAbs().maxCoeff() < 1e-6);
  }
  SECTION("white noise sample covariance approaches sigma") {
    Matrix phi = Matrix::Zero(3, 3);
    Matrix sigma(3, 3);
    sigma << 2.0, 0.5, 0.2, 0.5, 1.0, 0.1, 0.2, 0.1, 0.8;
    SeriesMatrix out = simulate_var(phi, sigma, 10000, 100, 11);
    Matrix centered = out.values.rowwise() - out.values.colwise().mean();
    Matrix cov = centered.transpose() * centered / out.rows();
    REQUIRE((cov - sigma).norm() / sigma.norm() < 0.10);
  }
  SECTION("VAR(1) with Phi = 0.5 I has lag-1 autocorrelation near 0.5") {
    Matrix phi = 0.5 * Matrix::Identity(2, 2);
    SeriesMatrix out = simulate_var(phi, Matrix::Identity(2, 2), 10000, 500, 21);
    for (int j = 0; j < 2; ++j) {
      Vector x = out.values.col(j);
      const double mu = x.mean();
      double num = 0.0, den = 0.0;
      for (int t = 1; t < x.size(); ++t) num += (x(t) - mu) * (x(t - 1) - mu);
      for (int t = 0; t < x.size(); ++t) den += (x(t) - mu) * (x(t) - mu);
      const double rho = num / den;
      REQUIRE(rho > 0.4);
      REQUIRE(rho < 0.6);
    }
  }
  SECTION("long-run mean of a zero-intercept stationary VAR is near zero") {
    Matrix phi = 0.6 * Matrix::Identity(2, 2);
    SeriesMatrix out = simulate_var(phi, Matrix::Identity(2, 2), 10000, 500, 33);
    // stationary sd of each series is 1/sqrt(1-0.36); mean se = sd/sqrt(T_eff)
    const double sd = 1.0 / std::sqrt(1.0 - 0.36);
    // account for autocorrelation: effective sample is T(1-rho)/(1+rho)
    const double neff = 10000.0 * (1.0 - 0.6) / (1.0 + 0.6);
    for (int j = 0; j < 2; ++j)
      REQUIRE(std::abs(out.values.col(j).mean()) < 3.0 * sd / std::sqrt(neff));
  }
}

TEST_CASE("simulation is seed deterministic") {
  Matrix phi = 0.4 * Matrix::Identity(2, 2);
  SeriesMatrix a = simulate_var(phi, Matrix::Identity(2, 2), 50, 10, 77);
  SeriesMatrix b = simulate_var(phi, Matrix::Identity(2, 2), 50, 10, 77);
  REQUIRE((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  SeriesMatrix c = simulate_var(phi, Matrix::Identity(2, 2), 50, 10, 78);
  REQUIRE((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("simulation rejects bad inputs") {
  REQUIRE_THROWS_AS(simulate_var(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 10), Error);
  Matrix not_spd = -Matrix::Identity(2, 2);
  REQUIRE_THROWS_AS(simulate_var(0.5 * Matrix::Identity(2, 2), not_spd, 10), Error);
}

TEST_CASE("scenario generators satisfy their defining properties") {
  SimulationScenarios sc = scenario_generators();
  REQUIRE(is_stationary(to_companion(sc.phi, 4)).stationary);

  // cliques: zero outside the two blocks
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const bool same_clique = (i < 4) == (j < 4);
      if (!same_clique) REQUIRE(sc.sigma_cliques(i, j) == 0.0);
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es1(sc.sigma_cliques);
  REQUIRE(es1.eigenvalues().minCoeff() > 0.0);

  Eigen::SelfAdjointEigenSolver<Matrix> es2(sc.sigma_ill);
  REQUIRE(es2.eigenvalues().maxCoeff() / es2.eigenvalues().minCoeff() >= 1e7);

  REQUIRE((sc.sigma_scaled - 0.1 * Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es3(sc.sigma_scaled);
  REQUIRE(es3.eigenvalues().maxCoeff() / es3.eigenvalues().minCoeff() == Catch::Approx(1.0));

  Eigen::SelfAdjointEigenSolver<Matrix> es4(sc.sigma_dense);
  REQUIRE(es4.eigenvalues().minCoeff() > 0.0);
  REQUIRE(es4.eigenvalues().maxCoeff() / es4.eigenvalues().minCoeff() < 100.0);
  REQUIRE(sc.sigma_dense.cwiseAbs().minCoeff() > 0.0);
}
