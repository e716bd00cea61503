#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "gls_granger/error.hpp"

namespace gls_granger {

/**
 * @brief Dense real symmetric matrix.
 *
 * Construction checks that the input is square, finite and symmetric up to rounding
 * (relative 1e-10), then mirrors the lower triangle so that entry (i, j) equals (j, i) bit for bit.
 */
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InvalidArgument("symmetric matrix must be square");
    if (m_.rows() == 0) throw InvalidArgument("symmetric matrix must have positive dimension");
    if (!m_.allFinite()) throw InvalidArgument("symmetric matrix has non-finite entries");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw InvalidArgument("matrix is not symmetric");
    }
    m_.triangularView<Eigen::StrictlyUpper>() = m_.transpose();
  }

  static SymmetricMatrix identity(Eigen::Index n) { return SymmetricMatrix(Eigen::MatrixXd::Identity(n, n)); }

  static SymmetricMatrix diagonal(const Eigen::VectorXd& d) { return SymmetricMatrix(d.asDiagonal().toDenseMatrix()); }

  [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  [[nodiscard]] SymmetricMatrix scaled(double c) const { return SymmetricMatrix(c * m_); }

 private:
  Eigen::MatrixXd m_;
};

/**
 * @brief Lower Cholesky factor A = L Lᵀ.
 *
 * A pivot fails when it is not strictly greater than `rel_tol * A(j, j)`; with the default
 * tolerance of zero only non-positive pivots fail. Failure throws NotPositiveDefinite.
 */
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Eigen::MatrixXd& a, double rel_tol = 0.0) : l_(a.rows(), a.cols()) {
    if (a.rows() != a.cols()) throw InvalidArgument("Cholesky factorization needs a square matrix");
    const Eigen::Index n = a.rows();
    l_.setZero();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = a(j, j) - l_.row(j).head(j).squaredNorm();
      if (!(d > rel_tol * std::abs(a(j, j))) || !(d > 0.0)) {
        throw NotPositiveDefinite(static_cast<std::size_t>(j), d);
      }
      const double ljj = std::sqrt(d);
      l_(j, j) = ljj;
      const Eigen::Index below = n - j - 1;
      if (below > 0) {
        l_.col(j).tail(below) =
            (a.col(j).tail(below) - l_.bottomLeftCorner(below, j) * l_.row(j).head(j).transpose()) / ljj;
      }
    }
  }

  explicit CholeskyFactor(const SymmetricMatrix& a, double rel_tol = 0.0) : CholeskyFactor(a.matrix(), rel_tol) {}

  [[nodiscard]] const Eigen::MatrixXd& lower() const noexcept { return l_; }

  /// Returns L⁻¹ B (the whitening transform).
  template <typename Derived>
  [[nodiscard]] Eigen::Matrix<double, Eigen::Dynamic, Derived::ColsAtCompileTime> whiten(
      const Eigen::MatrixBase<Derived>& b) const {
    check_rows(b.rows());
    return l_.triangularView<Eigen::Lower>().solve(b);
  }

  /// Returns A⁻¹ B.
  template <typename Derived>
  [[nodiscard]] Eigen::Matrix<double, Eigen::Dynamic, Derived::ColsAtCompileTime> solve(
      const Eigen::MatrixBase<Derived>& b) const {
    check_rows(b.rows());
    Eigen::Matrix<double, Eigen::Dynamic, Derived::ColsAtCompileTime> z = l_.triangularView<Eigen::Lower>().solve(b);
    l_.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    return z;
  }

  [[nodiscard]] Eigen::MatrixXd inverse() const {
    return solve(Eigen::MatrixXd::Identity(l_.rows(), l_.cols()));
  }

 private:
  void check_rows(Eigen::Index rows) const {
    if (rows != l_.rows()) throw InvalidArgument("right-hand side has the wrong number of rows");
  }

  Eigen::MatrixXd l_;
};

/// Solves A Z = B for symmetric positive definite A without forming A⁻¹.
template <typename Derived>
[[nodiscard]] auto cholesky_solve(const SymmetricMatrix& a, const Eigen::MatrixBase<Derived>& b) {
  return CholeskyFactor(a).solve(b);
}

inline constexpr double kDefaultSpdFloor = 1e-8;

namespace detail {

inline SymmetricMatrix floor_spectrum(const SymmetricMatrix& a,
                                      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig, double floor) {
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  if (lambda(0) >= floor) return a;
  const Eigen::VectorXd clamped = lambda.cwiseMax(floor);
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::MatrixXd out = v * clamped.asDiagonal() * v.transpose();
  return SymmetricMatrix(0.5 * (out + out.transpose()));
}

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_decompose(const SymmetricMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.matrix());
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigen-decomposition did not converge");
  return eig;
}

inline SymmetricMatrix scalar_fallback(const SymmetricMatrix& a, double lower) {
  const double level = std::max(a.matrix().diagonal().mean(), lower);
  return SymmetricMatrix(level * Eigen::MatrixXd::Identity(a.dim(), a.dim()));
}

}  // namespace detail

/**
 * @brief Repairs a symmetric matrix into a positive definite one by flooring its spectrum.
 *
 * Each eigenvalue is raised to at least `eps_rel * λ_max`. When λ_max is not positive the
 * spectrum carries no usable scale, and the result is `mean(diag(A)) * I` with the mean
 * clamped below at `eps_rel`.
 */
[[nodiscard]] inline SymmetricMatrix spd_floor(const SymmetricMatrix& a, double eps_rel = kDefaultSpdFloor) {
  if (!(eps_rel > 0.0)) throw InvalidArgument("spd_floor needs a positive relative floor");
  const auto eig = detail::eigen_decompose(a);
  const double lambda_max = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  if (!(lambda_max > 0.0)) return detail::scalar_fallback(a, eps_rel);
  return detail::floor_spectrum(a, eig, eps_rel * lambda_max);
}

/**
 * @brief Floors the spectrum at `fraction * mean(diag(A))`, the average variance on the diagonal.
 *
 * Falls back like spd_floor when the diagonal mean is not positive.
 */
[[nodiscard]] inline SymmetricMatrix variance_floor(const SymmetricMatrix& a, double fraction) {
  if (!(fraction > 0.0)) throw InvalidArgument("variance floor must be a positive fraction");
  const double level = fraction * a.matrix().diagonal().mean();
  if (!(level > 0.0)) return detail::scalar_fallback(a, std::numeric_limits<double>::min());
  return detail::floor_spectrum(a, detail::eigen_decompose(a), level);
}

namespace detail {

// Floors the spectrum of F Fᵀ at `level` using the eigenpairs of the small Gram matrix Fᵀ F.
// Directions outside the column space of F have eigenvalue zero and end up exactly at `level`.
inline SymmetricMatrix floor_factored(const Eigen::MatrixXd& f, const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& gram,
                                      double level) {
  Eigen::MatrixXd out = level * Eigen::MatrixXd::Identity(f.rows(), f.rows());
  const Eigen::VectorXd& lambda = gram.eigenvalues();
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (!(lambda(k) > level)) continue;
    const Eigen::VectorXd u = f * gram.eigenvectors().col(k) / std::sqrt(lambda(k));
    out.selfadjointView<Eigen::Lower>().rankUpdate(u, lambda(k) - level);
  }
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return SymmetricMatrix(std::move(out));
}

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_decompose(const Eigen::MatrixXd& f) {
  if (f.rows() == 0 || f.cols() == 0) throw InvalidArgument("factor must be non-empty");
  if (!f.allFinite()) throw InvalidArgument("factor has non-finite entries");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(f.cols(), f.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(f.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.selfadjointView<Eigen::Lower>());
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigen-decomposition did not converge");
  return eig;
}

inline SymmetricMatrix scalar_identity(Eigen::Index n, double level) {
  return SymmetricMatrix(level * Eigen::MatrixXd::Identity(n, n));
}

}  // namespace detail

/// spd_floor(F Fᵀ, eps_rel) computed from the factor, without forming or decomposing F Fᵀ.
[[nodiscard]] inline SymmetricMatrix spd_floor_factored(const Eigen::MatrixXd& f, double eps_rel = kDefaultSpdFloor) {
  if (!(eps_rel > 0.0)) throw InvalidArgument("spd_floor needs a positive relative floor");
  const auto gram = detail::gram_decompose(f);
  const double lambda_max = gram.eigenvalues()(gram.eigenvalues().size() - 1);
  if (!(lambda_max > 0.0)) return detail::scalar_identity(f.rows(), eps_rel);
  return detail::floor_factored(f, gram, eps_rel * lambda_max);
}

/// variance_floor(F Fᵀ, fraction) computed from the factor.
[[nodiscard]] inline SymmetricMatrix variance_floor_factored(const Eigen::MatrixXd& f, double fraction) {
  if (!(fraction > 0.0)) throw InvalidArgument("variance floor must be a positive fraction");
  const double level = fraction * f.squaredNorm() / static_cast<double>(f.rows());
  const auto gram = detail::gram_decompose(f);
  if (!(level > 0.0)) return detail::scalar_identity(f.rows(), std::numeric_limits<double>::min());
  return detail::floor_factored(f, gram, level);
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace detail

/**
 * @brief Regularized incomplete beta I_x(a, b) and its complement.
 *
 * `y` must equal 1 - x; passing it separately keeps the complement accurate when x is close to 1.
 * Returns {I_x(a, b), 1 - I_x(a, b)}.
 */
[[nodiscard]] inline std::pair<double, double> incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta needs positive shape parameters");
  if (x <= 0.0) return {0.0, 1.0};
  if (y <= 0.0) return {1.0, 0.0};
  const double log_front = a * std::log(x) + b * std::log(y) - detail::log_beta(a, b);
  const double front = std::exp(log_front);
  // Evaluate the fraction on the side of the mean where it converges fast.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = front * detail::beta_continued_fraction(a, b, x) / a;
    return {lower, 1.0 - lower};
  }
  const double upper = front * detail::beta_continued_fraction(b, a, y) / b;
  return {1.0 - upper, upper};
}

namespace detail {

inline std::pair<double, double> f_tails(double x, double d1, double d2) {
  if (!(x >= 0.0)) throw InvalidArgument("F distribution argument must be nonnegative");
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InvalidArgument("F distribution degrees of freedom must be positive");
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  const double denom = d1 * x + d2;
  return incomplete_beta(0.5 * d1, 0.5 * d2, d1 * x / denom, d2 / denom);
}

}  // namespace detail

/// CDF of the F(d1, d2) distribution.
[[nodiscard]] inline double f_cdf(double x, double d1, double d2) { return detail::f_tails(x, d1, d2).first; }

/// Upper tail 1 - f_cdf(x, d1, d2), evaluated without cancellation.
[[nodiscard]] inline double f_sf(double x, double d1, double d2) { return detail::f_tails(x, d1, d2).second; }

}  // namespace gls_granger
