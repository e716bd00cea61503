#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "gls_granger/error.hpp"
#include "gls_granger/numerics.hpp"
#include "gls_granger/regression.hpp"

namespace gls_granger {

inline constexpr double kDefaultAlpha = 0.05;

/// Linear hypothesis H0: R β = r with Q linearly independent rows.
class Restriction {
 public:
  Restriction(Eigen::MatrixXd r_matrix, Eigen::VectorXd r_vector)
      : r_matrix_(std::move(r_matrix)), r_vector_(std::move(r_vector)) {
    if (r_matrix_.rows() == 0) throw InvalidArgument("restriction needs at least one row");
    if (r_matrix_.rows() != r_vector_.size()) throw InvalidArgument("R and r disagree on the number of restrictions");
    if (r_matrix_.rows() > r_matrix_.cols()) throw InvalidArgument("more restrictions than parameters");
    const Eigen::MatrixXd gram = r_matrix_ * r_matrix_.transpose();
    try {
      CholeskyFactor(gram, 1e-12);
    } catch (const NotPositiveDefinite& e) {
      throw InvalidArgument("restriction rows are linearly dependent (row " + std::to_string(e.pivot()) + ")");
    }
  }

  [[nodiscard]] const Eigen::MatrixXd& r_matrix() const noexcept { return r_matrix_; }
  [[nodiscard]] const Eigen::VectorXd& r_vector() const noexcept { return r_vector_; }
  [[nodiscard]] std::size_t q() const noexcept { return static_cast<std::size_t>(r_matrix_.rows()); }
  [[nodiscard]] std::size_t parameters() const noexcept { return static_cast<std::size_t>(r_matrix_.cols()); }

 private:
  Eigen::MatrixXd r_matrix_;
  Eigen::VectorXd r_vector_;
};

/// Selects the p exogenous-lag coefficients of a 1 + 2p parameter design and tests them against zero.
[[nodiscard]] inline Restriction granger_restriction(std::size_t p) {
  if (p == 0) throw InvalidArgument("lag order must be positive");
  const auto q = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(q, 1 + 2 * q);
  r.rightCols(q).setIdentity();
  return {std::move(r), Eigen::VectorXd::Zero(q)};
}

struct TestResult {
  double statistic = 0.0;
  double df1 = 1.0;
  double df2 = 1.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = kDefaultAlpha;
};

/// Fills p-value and verdict for an F-distributed statistic. An infinite statistic gives p = 0.
[[nodiscard]] inline TestResult f_test_result(double statistic, double df1, double df2, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("significance level must lie in (0, 1)");
  TestResult out;
  out.statistic = statistic;
  out.df1 = df1;
  out.df2 = df2;
  out.alpha = alpha;
  out.p_value = std::isinf(statistic) ? 0.0 : f_sf(statistic, df1, df2);
  out.reject = out.p_value < alpha;
  return out;
}

/**
 * @brief Wald quadratic form (Rβ̂ - r)ᵀ (R V Rᵀ)⁻¹ (Rβ̂ - r).
 *
 * The middle inverse is applied by Cholesky solve; a singular R V Rᵀ throws NotPositiveDefinite.
 */
[[nodiscard]] inline double wald_statistic(const Eigen::VectorXd& coefficients, const SymmetricMatrix& covariance,
                                           const Restriction& h) {
  if (static_cast<std::size_t>(coefficients.size()) != h.parameters() ||
      covariance.dim() != coefficients.size()) {
    throw InvalidArgument("restriction has " + std::to_string(h.parameters()) + " columns but the fit has " +
                          std::to_string(coefficients.size()) + " coefficients");
  }
  const Eigen::VectorXd diff = h.r_matrix() * coefficients - h.r_vector();
  const Eigen::MatrixXd middle = h.r_matrix() * covariance.matrix() * h.r_matrix().transpose();
  const SymmetricMatrix rvr(0.5 * (middle + middle.transpose()));
  const Eigen::VectorXd solved = cholesky_solve(rvr, diff);
  return std::max(0.0, diff.dot(solved));
}

[[nodiscard]] inline double wald_statistic(const FitResult& f, const Restriction& h) {
  return wald_statistic(f.coefficients, f.coef_covariance, h);
}

/// Wald test referred to F(Q, n_eff - m): the statistic reported is the quadratic form divided by Q.
[[nodiscard]] inline TestResult wald_test(const FitResult& f, const Restriction& h, double alpha = kDefaultAlpha) {
  const double w = wald_statistic(f, h);
  const auto q = static_cast<double>(h.q());
  return f_test_result(w / q, q, static_cast<double>(f.df_resid()), alpha);
}

struct FStatistic {
  double statistic;
  double df1;
  double df2;
};

/**
 * @brief Classical Granger F statistic ((SSR_R - SSR_U) / p) / (SSR_U / (n_eff - 2p - 1)).
 *
 * A restricted SSR below the unrestricted one by more than 1e-10 (relative to max(1, SSR_U)) means
 * the two fits were not nested and throws NumericalInconsistency. A perfect unrestricted fit with a
 * positive gain yields an infinite statistic.
 */
[[nodiscard]] inline FStatistic granger_f_statistic(double ssr_rm, double ssr_um, std::size_t p, std::size_t n_eff) {
  if (p == 0) throw InvalidArgument("lag order must be positive");
  if (!(ssr_um >= 0.0) || !(ssr_rm >= 0.0)) throw InvalidArgument("sums of squares must be nonnegative");
  if (n_eff < 2 * p + 2) throw InvalidArgument("too few observations for the unrestricted model");
  const double df1 = static_cast<double>(p);
  const double df2 = static_cast<double>(n_eff - (2 * p + 1));
  double gain = ssr_rm - ssr_um;
  if (gain < 0.0) {
    if (-gain > 1e-10 * std::max(1.0, ssr_um)) {
      throw NumericalInconsistency("restricted SSR " + std::to_string(ssr_rm) + " is below unrestricted SSR " +
                                   std::to_string(ssr_um));
    }
    gain = 0.0;
  }
  if (ssr_um == 0.0) {
    return {gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0, df1, df2};
  }
  return {(gain / df1) / (ssr_um / df2), df1, df2};
}

}  // namespace gls_granger
