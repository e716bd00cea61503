#include <gtest/gtest.h>

#include <random>

#include "gls_granger/regression.hpp"
#include "gls_granger/simulation.hpp"
#include "oracles.hpp"

using namespace gls_granger;

namespace {

Eigen::MatrixXd random_design(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(rows, cols);
  x.col(0).setOnes();
  for (Eigen::Index j = 1; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = g(rng);
  }
  return x;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

TEST(Ols, TwoEquationHandSolve) {
  Eigen::MatrixXd x(2, 2);
  x << 1, 1, 1, 2;
  Eigen::MatrixXd x3(3, 2);
  x3 << 1, 1, 1, 2, 1, 3;
  const FitResult f = ols_fit(x3, Eigen::Vector3d(2, 3, 4));
  EXPECT_NEAR(f.coefficients(0), 1.0, 1e-12);
  EXPECT_NEAR(f.coefficients(1), 1.0, 1e-12);
  EXPECT_THROW((void)ols_fit(x, Eigen::Vector2d(2, 3)), InvalidArgument);
}

TEST(Ols, NoiseFreeFitIsExact) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = random_design(50, 6, rng);
  const Eigen::VectorXd beta = random_vector(6, rng);
  const FitResult f = ols_fit(x, x * beta);
  EXPECT_LE((f.coefficients - beta).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(f.ssr, 1e-12);
  const TimeSeries r = residual_series(f);
  EXPECT_EQ(r.size(), 50u);
  for (double v : r.values()) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(Ols, MatchesQrOracle) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd x = random_design(40 + rep, 1 + rep % 7, rng);
    const Eigen::VectorXd y = random_vector(x.rows(), rng);
    const FitResult f = ols_fit(x, y);
    EXPECT_LE((f.coefficients - oracle::ols_qr(x, y)).norm(), 1e-9 * (1 + f.coefficients.norm()));
    EXPECT_NEAR(f.ssr, f.residuals.squaredNorm(), 1e-8 * f.ssr);
    EXPECT_LE((f.residuals - (y - x * oracle::ols_qr(x, y))).cwiseAbs().maxCoeff(), 1e-9);
    const double s2 = f.ssr / static_cast<double>(x.rows() - x.cols());
    const Eigen::MatrixXd expected = s2 * (x.transpose() * x).inverse();
    EXPECT_LE((f.coef_covariance.matrix() - expected).cwiseAbs().maxCoeff(), 1e-10 * expected.cwiseAbs().maxCoeff());
  }
}

TEST(Ols, DuplicatedColumnIsCollinear) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd x = random_design(30, 4, rng);
  Eigen::MatrixXd dup(30, 5);
  dup << x, x.col(2);
  EXPECT_THROW((void)ols_fit(dup, random_vector(30, rng)), CollinearDesign);
}

TEST(Ols, LaggedDesignResidualsMatchDirectMultiply) {
  const TimeSeries x = gen_ar1({0.5, 1.0, 120, 1, 50});
  const TimeSeries y = gen_ar1({0.3, 1.0, 120, 2, 50});
  const LaggedDesign d = build_lagged_design(y, x, 3);
  const FitResult f = ols_fit(d);
  const Eigen::VectorXd direct = d.response() - d.matrix() * f.coefficients;
  const TimeSeries r = residual_series(f);
  ASSERT_EQ(r.size(), d.n_eff());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i], direct(static_cast<Eigen::Index>(i)), 1e-12);
}

TEST(Gls, IdentityCovarianceReducesToOls) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = random_design(60, 5, rng);
  const Eigen::VectorXd y = random_vector(60, rng);
  const FitResult o = ols_fit(x, y);
  const FitResult g = gls_fit(x, y, SymmetricMatrix::identity(60));
  EXPECT_LE((o.coefficients - g.coefficients).cwiseAbs().maxCoeff(), 1e-10);
  const double s2 = o.ssr / static_cast<double>(o.df_resid());
  EXPECT_LE((g.coef_covariance.matrix() * s2 - o.coef_covariance.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(g.method, FitMethod::GLS);
}

TEST(Gls, ScalarCovarianceOnlyScalesV) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = random_design(45, 4, rng);
  const Eigen::VectorXd y = random_vector(45, rng);
  const FitResult a = gls_fit(x, y, SymmetricMatrix::identity(45));
  const FitResult b = gls_fit(x, y, SymmetricMatrix::identity(45).scaled(3.5));
  EXPECT_LE((a.coefficients - b.coefficients).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((b.coef_covariance.matrix() - 3.5 * a.coef_covariance.matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gls, MatchesClosedForm) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd x = random_design(40, 3, rng);
  const Eigen::VectorXd y = random_vector(40, rng);
  const Eigen::MatrixXd omega = oracle::random_spd(40, rng);
  const FitResult g = gls_fit(x, y, SymmetricMatrix(omega));
  const Eigen::MatrixXd oi = omega.inverse();
  const Eigen::MatrixXd v = (x.transpose() * oi * x).inverse();
  const Eigen::VectorXd beta = v * x.transpose() * oi * y;
  EXPECT_LE((g.coefficients - beta).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((g.coef_covariance.matrix() - v).cwiseAbs().maxCoeff(), 1e-9 * v.cwiseAbs().maxCoeff());
  EXPECT_LE((g.residuals - (y - x * beta)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(g.ssr, g.residuals.squaredNorm(), 1e-10);
}

TEST(Gls, WhitenedResidualsOrthogonalToWhitenedDesign) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd x = random_design(50, 4, rng);
  const Eigen::VectorXd y = random_vector(50, rng);
  const CholeskyFactor l(oracle::random_spd(50, rng));
  const FitResult g = gls_fit(x, y, l);
  const Eigen::MatrixXd xw = l.whiten(x);
  const Eigen::VectorXd yw = l.whiten(y);
  EXPECT_LE((xw.transpose() * (yw - xw * g.coefficients)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(g.whitened_ssr, (yw - xw * g.coefficients).squaredNorm(), 1e-10);
}

TEST(Gls, CoefficientsMinimizeTheGeneralizedObjective) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = random_design(35, 4, rng);
  const Eigen::VectorXd y = random_vector(35, rng);
  const Eigen::MatrixXd omega = oracle::random_spd(35, rng);
  const CholeskyFactor l(omega);
  const FitResult g = gls_fit(x, y, l);
  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd e = y - x * b;
    return e.dot(l.solve(e));
  };
  const double best = objective(g.coefficients);
  for (Eigen::Index k = 0; k < g.coefficients.size(); ++k) {
    for (double h : {1e-3, -1e-3}) {
      Eigen::VectorXd b = g.coefficients;
      b(k) += h;
      EXPECT_GT(objective(b), best) << "coefficient " << k;
    }
  }
}

TEST(Gls, BeatsOlsUnderKnownHeteroskedasticity) {
  double mse_ols = 0.0, mse_gls = 0.0;
  const Eigen::Index n = 200;
  Eigen::VectorXd sd(n);
  for (Eigen::Index t = 0; t < n; ++t) sd(t) = 0.2 + 5.0 * static_cast<double>(t) / static_cast<double>(n);
  const SymmetricMatrix omega = SymmetricMatrix::diagonal(sd.array().square().matrix());
  const Eigen::Vector3d beta(1.0, -0.5, 2.0);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd x = random_design(n, 3, rng);
    const Eigen::VectorXd y = x * beta + random_vector(n, rng).cwiseProduct(sd);
    mse_ols += (ols_fit(x, y).coefficients - beta).squaredNorm();
    mse_gls += (gls_fit(x, y, omega).coefficients - beta).squaredNorm();
  }
  EXPECT_LE(mse_gls, mse_ols);
}

TEST(Gls, Errors) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd x = random_design(20, 3, rng);
  const Eigen::VectorXd y = random_vector(20, rng);
  EXPECT_THROW((void)gls_fit(x, y, SymmetricMatrix::identity(19)), InvalidArgument);
  Eigen::VectorXd d = Eigen::VectorXd::Ones(20);
  d(4) = 0.0;
  EXPECT_THROW((void)gls_fit(x, y, SymmetricMatrix::diagonal(d)), NotPositiveDefinite);
  Eigen::MatrixXd dup(20, 4);
  dup << x, 2.0 * x.col(1);
  EXPECT_THROW((void)gls_fit(dup, y, SymmetricMatrix::identity(20)), CollinearDesign);
}
