#include <gtest/gtest.h>

#include <cmath>

#include "gls_granger/autocovariance.hpp"
#include "gls_granger/simulation.hpp"
#include "oracles.hpp"

using namespace gls_granger;

TEST(WindowSpec, Bounds) {
  EXPECT_THROW((void)WindowSpec::checked(1, 10), InvalidArgument);
  EXPECT_THROW((void)WindowSpec::checked(10, 10), InvalidArgument);
  EXPECT_EQ(WindowSpec::checked(9, 10).tau, 9u);
  EXPECT_EQ(WindowSpec::from_fraction(kBenchmarkWindowFraction, 600).tau, 120u);
  EXPECT_EQ(WindowSpec::from_fraction(kDiagnosticWindowFraction, 600).tau, 200u);
}

TEST(ReflectPad, ThreePoints) {
  EXPECT_EQ(reflect_pad(TimeSeries({1, 2, 3}), 2), TimeSeries({3, 2, 1, 2, 3}));
}

TEST(ReflectPad, SingleReflection) {
  const TimeSeries p = reflect_pad(TimeSeries({4, 7, 9, 1}), 1);
  EXPECT_EQ(p, TimeSeries({7, 4, 7, 9, 1}));
}

TEST(ReflectPad, OriginalSegmentIntactAndMatchesOracle) {
  const auto v = oracle::white_noise(25, 1);
  const TimeSeries p = reflect_pad(TimeSeries(v), 9);
  EXPECT_EQ(std::vector<double>(p.values().begin() + 9, p.values().end()), v);
  EXPECT_EQ(std::vector<double>(p.values().begin(), p.values().end()), oracle::reflect(v, 9));
  EXPECT_THROW((void)reflect_pad(TimeSeries(v), 25), InvalidArgument);
}

TEST(WindowedAutocov, ConstantSeriesIsZero) {
  const TimeSeries s(std::vector<double>(12, 3.25));
  EXPECT_EQ(windowed_autocov(s, 11, 7, 4), 0.0);
}

TEST(WindowedAutocov, HandEvaluation) {
  EXPECT_DOUBLE_EQ(windowed_autocov(TimeSeries({1, 2, 3, 4, 5}), 4, 4, 2), 1.0);
}

TEST(WindowedAutocov, SymmetricAndMatchesOracle) {
  const auto v = oracle::white_noise(40, 2);
  const TimeSeries s(v);
  for (std::size_t t = 6; t < 40; t += 5) {
    for (std::size_t u = 6; u < 40; u += 3) {
      EXPECT_EQ(windowed_autocov(s, t, u, 6), windowed_autocov(s, u, t, 6));
      EXPECT_NEAR(windowed_autocov(s, t, u, 6), oracle::windowed_autocov(v, t, u, 6), 1e-14);
    }
  }
  EXPECT_THROW((void)windowed_autocov(s, 5, 10, 6), InvalidArgument);
  EXPECT_THROW((void)windowed_autocov(s, 40, 10, 6), InvalidArgument);
}

TEST(SlidingMatrix, ConstantSeriesGivesZero) {
  const SymmetricMatrix m = sliding_autocov_matrix(TimeSeries(std::vector<double>(20, -1.5)), 5);
  EXPECT_EQ(m.matrix().cwiseAbs().maxCoeff(), 0.0);
}

TEST(SlidingMatrix, MatchesCellByCellOracle) {
  const auto v = oracle::white_noise(60, 3);
  for (std::size_t tau : {2u, 7u, 20u}) {
    const SymmetricMatrix m = sliding_autocov_matrix(TimeSeries(v), tau);
    const Eigen::MatrixXd expected = oracle::sliding_matrix(v, tau);
    EXPECT_LE((m.matrix() - expected).cwiseAbs().maxCoeff(), 1e-12) << tau;
  }
}

TEST(SlidingMatrix, ExactlySymmetricAndLowRank) {
  const SymmetricMatrix m = sliding_autocov_matrix(TimeSeries(oracle::white_noise(80, 4)), 10);
  EXPECT_EQ(m.matrix(), m.matrix().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.matrix());
  const double top = eig.eigenvalues().maxCoeff();
  int significant = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) significant += eig.eigenvalues()(i) > 1e-10 * top;
  EXPECT_LE(significant, 10);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * top);
}

TEST(SlidingMatrix, WithoutReflectionCoversCompleteWindowsOnly) {
  const auto v = oracle::white_noise(30, 5);
  const SymmetricMatrix m = sliding_autocov_matrix(TimeSeries(v), 4, {false});
  EXPECT_EQ(m.dim(), 26);
  EXPECT_NEAR(m(0, 3), oracle::windowed_autocov(v, 4, 7, 4), 1e-14);
}

TEST(SlidingMatrix, ScaleEquivariance) {
  const TimeSeries s(oracle::white_noise(70, 6));
  const SymmetricMatrix a = sliding_autocov_matrix(s, 12);
  const SymmetricMatrix b = sliding_autocov_matrix(s.scaled(-3.0), 12);
  EXPECT_LE((b.matrix() - 9.0 * a.matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SlidingMatrix, FactorReproducesMatrix) {
  const TimeSeries s(oracle::white_noise(50, 7));
  const Eigen::MatrixXd f = sliding_autocov_factor(s, 9);
  EXPECT_EQ(f.cols(), 10);
  EXPECT_LE((f * f.transpose() - sliding_autocov_matrix(s, 9).matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SlidingMatrix, WhiteNoiseOffBandIsSmall) {
  const double sigma = 1.5;
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SymmetricMatrix m = sliding_autocov_matrix(TimeSeries(oracle::white_noise(600, seed, sigma)), 200);
    double acc = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < m.dim(); ++i) {
      for (Eigen::Index j = i + 26; j < m.dim(); ++j) {
        acc += std::abs(m(i, j));
        ++count;
      }
    }
    total += acc / static_cast<double>(count);
  }
  EXPECT_LT(total / 20.0, sigma * sigma / 5.0);
}

TEST(SlidingMatrix, Ar1PatternDecaysWithDistance) {
  const TimeSeries s = gen_ar1({0.9, 1.0, 600, 17, 200});
  const SymmetricMatrix m = sliding_autocov_matrix(s, 200);
  const double var = 1.0 / 0.19;
  double diag = 0.0, lag5 = 0.0, lag40 = 0.0;
  for (Eigen::Index i = 0; i + 40 < m.dim(); ++i) {
    diag += m(i, i);
    lag5 += m(i, i + 5);
    lag40 += m(i, i + 40);
  }
  const double rows = static_cast<double>(m.dim() - 40);
  EXPECT_NEAR(diag / rows, var, 0.5 * var);
  EXPECT_GT(lag5 / diag, 0.4);
  EXPECT_LT(std::abs(lag40 / diag), lag5 / diag);
}

TEST(SlidingMatrix, StructuralBreakRegimesMatchWithinRegimeAutocovariance) {
  // x_t = AR(1) + shift after the break; inside each regime Ω_τ estimates the AR(1) covariance.
  const std::size_t n = 600, brk = 300, tau = 100;
  const double var = 1.0 / (1.0 - 0.25);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const TimeSeries base = gen_ar1({0.5, 1.0, n, seed, 200});
    std::vector<double> v(base.values().begin(), base.values().end());
    for (std::size_t t = brk; t < n; ++t) v[t] += 4.0;
    mean += sliding_autocov_matrix(TimeSeries(v), tau).matrix() / 10.0;
  }
  const SymmetricMatrix theory = ar1_theoretical_autocov(0.5, 1.0, n);
  for (auto [lo, hi] : {std::pair<std::size_t, std::size_t>{tau, brk}, {brk + tau, n}}) {
    const auto len = static_cast<Eigen::Index>(hi - lo);
    const auto off = static_cast<Eigen::Index>(lo);
    const Eigen::MatrixXd est = mean.block(off, off, len, len);
    const Eigen::MatrixXd th = theory.matrix().block(off, off, len, len);
    EXPECT_LE((est - th).norm() / th.norm(), 0.5) << lo;
  }
  EXPECT_NEAR(theory(0, 0), var, 1e-12);
}

TEST(Ar1Theory, WhiteNoiseLimitAndClosedForm) {
  EXPECT_EQ(ar1_theoretical_autocov(0.0, 1.0, 4).matrix(), Eigen::MatrixXd::Identity(4, 4));
  const SymmetricMatrix m = ar1_theoretical_autocov(0.9, 1.0, 2);
  const double v = 1.0 / 0.19;
  EXPECT_NEAR(m(0, 0), v, 1e-12);
  EXPECT_NEAR(m(0, 1), 0.9 * v, 1e-12);
  const SymmetricMatrix big = ar1_theoretical_autocov(0.7, 2.0, 30);
  for (Eigen::Index i = 1; i < 30; ++i) EXPECT_EQ(big(i, i), big(0, 0));
  EXPECT_THROW((void)ar1_theoretical_autocov(1.0, 1.0, 3), InvalidArgument);
}

TEST(Ar1Theory, AgreesWithLongRunSampleVariance) {
  const TimeSeries s = gen_ar1({0.9, 1.0, 200000, 99, 500});
  const auto v = s.as_vector();
  const double var = (v.array() - v.mean()).square().mean();
  EXPECT_NEAR(var, ar1_theoretical_autocov(0.9, 1.0, 1)(0, 0), 0.05 * var);
}
