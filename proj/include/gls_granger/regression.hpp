#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "gls_granger/error.hpp"
#include "gls_granger/numerics.hpp"
#include "gls_granger/time_series.hpp"

namespace gls_granger {

enum class FitMethod { OLS, GLS };

inline const char* to_string(FitMethod m) { return m == FitMethod::OLS ? "OLS" : "GLS"; }

/**
 * @brief Outcome of a least-squares fit.
 *
 * `residuals` and `ssr` are always in the original scale (y - Xβ̂). For GLS, `whitened_ssr` is the
 * sum of squares of the whitened residuals L⁻¹(y - Xβ̂); for OLS it equals `ssr`.
 *
 * `coef_covariance` is s²(XᵀX)⁻¹ for OLS with s² = ssr / df_resid, and (XᵀΩ⁻¹X)⁻¹ for GLS.
 */
struct FitResult {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  double ssr = 0.0;
  double whitened_ssr = 0.0;
  SymmetricMatrix coef_covariance = SymmetricMatrix::identity(1);
  FitMethod method = FitMethod::OLS;
  std::size_t n_obs = 0;
  std::size_t n_params = 0;

  [[nodiscard]] std::size_t df_resid() const noexcept { return n_obs - n_params; }
};

namespace detail {

// Relative pivot tolerance that separates rank deficiency from ordinary ill-conditioning in XᵀX.
inline constexpr double kCollinearPivotTolerance = 1e-10;

struct NormalEquations {
  Eigen::VectorXd beta;
  Eigen::MatrixXd inverse_gram;
};

inline NormalEquations solve_normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw InvalidArgument("design rows and response length differ");
  if (x.rows() <= x.cols()) throw InvalidArgument("regression needs more observations than parameters");
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  try {
    const CholeskyFactor chol(gram, kCollinearPivotTolerance);
    return {chol.solve(x.transpose() * y), chol.inverse()};
  } catch (const NotPositiveDefinite& e) {
    throw CollinearDesign(e.pivot());
  }
}

inline SymmetricMatrix symmetrized(const Eigen::MatrixXd& m) { return SymmetricMatrix(0.5 * (m + m.transpose())); }

}  // namespace detail

/// Ordinary least squares via the normal equations. Throws CollinearDesign when XᵀX is singular.
[[nodiscard]] inline FitResult ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  auto [beta, inv_gram] = detail::solve_normal_equations(x, y);
  FitResult fit;
  fit.residuals = y - x * beta;
  fit.coefficients = std::move(beta);
  fit.ssr = fit.residuals.squaredNorm();
  fit.whitened_ssr = fit.ssr;
  fit.method = FitMethod::OLS;
  fit.n_obs = static_cast<std::size_t>(x.rows());
  fit.n_params = static_cast<std::size_t>(x.cols());
  const double s2 = fit.ssr / static_cast<double>(fit.df_resid());
  fit.coef_covariance = detail::symmetrized(s2 * inv_gram);
  return fit;
}

[[nodiscard]] inline FitResult ols_fit(const LaggedDesign& d) { return ols_fit(d.matrix(), d.response()); }

/**
 * @brief Generalized least squares with a known residual covariance.
 *
 * Ω is factored once as L Lᵀ; the design and response are whitened by L⁻¹ and fitted by OLS.
 * `omega_factor` must factor a matrix of dimension n_eff.
 */
[[nodiscard]] inline FitResult gls_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       const CholeskyFactor& omega_factor) {
  if (omega_factor.lower().rows() != x.rows()) {
    throw InvalidArgument("residual covariance has dimension " + std::to_string(omega_factor.lower().rows()) +
                          " but the design has " + std::to_string(x.rows()) + " rows");
  }
  const Eigen::MatrixXd xw = omega_factor.whiten(x);
  const Eigen::VectorXd yw = omega_factor.whiten(y);
  auto [beta, inv_gram] = detail::solve_normal_equations(xw, yw);
  FitResult fit;
  fit.residuals = y - x * beta;
  fit.ssr = fit.residuals.squaredNorm();
  fit.whitened_ssr = (yw - xw * beta).squaredNorm();
  fit.coefficients = std::move(beta);
  fit.method = FitMethod::GLS;
  fit.n_obs = static_cast<std::size_t>(x.rows());
  fit.n_params = static_cast<std::size_t>(x.cols());
  fit.coef_covariance = detail::symmetrized(inv_gram);
  return fit;
}

[[nodiscard]] inline FitResult gls_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SymmetricMatrix& omega) {
  return gls_fit(x, y, CholeskyFactor(omega));
}

[[nodiscard]] inline FitResult gls_fit(const LaggedDesign& d, const SymmetricMatrix& omega) {
  return gls_fit(d.matrix(), d.response(), omega);
}

/// Residuals of a fit as a series, in time order.
[[nodiscard]] inline TimeSeries residual_series(const FitResult& f, std::string name = "residual") {
  return TimeSeries::from_vector(f.residuals, std::move(name));
}

}  // namespace gls_granger
