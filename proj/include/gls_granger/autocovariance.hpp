#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gls_granger/error.hpp"
#include "gls_granger/numerics.hpp"
#include "gls_granger/time_series.hpp"

namespace gls_granger {

/// Window length for the sliding estimator: at least two points, shorter than the series.
struct WindowSpec {
  std::size_t tau;

  static WindowSpec checked(std::size_t tau, std::size_t series_length) {
    if (tau < 2) throw InvalidArgument("window length must be at least 2, got " + std::to_string(tau));
    if (tau >= series_length) {
      throw InvalidArgument("window length " + std::to_string(tau) + " must be shorter than the series (" +
                            std::to_string(series_length) + ")");
    }
    return {tau};
  }

  /// floor(fraction * n), validated against n.
  static WindowSpec from_fraction(double fraction, std::size_t n) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("window fraction must lie in (0, 1)");
    return checked(static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))), n);
  }
};

/// Window fraction used by the causality benchmark.
inline constexpr double kBenchmarkWindowFraction = 1.0 / 5.0;
/// Window fraction used for autocovariance diagnostics.
inline constexpr double kDiagnosticWindowFraction = 1.0 / 3.0;

/**
 * @brief Prepends `tau` mirrored values so index i of the result is original index i - tau.
 *
 * The value at original index -t is s[t]; (a, b, c) with tau = 2 becomes (c, b, a, b, c).
 */
[[nodiscard]] inline TimeSeries reflect_pad(const TimeSeries& s, std::size_t tau) {
  if (tau >= s.size()) {
    throw InvalidArgument("reflection length " + std::to_string(tau) + " must be shorter than the series (" +
                          std::to_string(s.size()) + ")");
  }
  std::vector<double> out;
  out.reserve(s.size() + tau);
  for (std::size_t t = tau; t >= 1; --t) out.push_back(s[t]);
  out.insert(out.end(), s.values().begin(), s.values().end());
  return TimeSeries(std::move(out), s.name());
}

/**
 * @brief Windowed sample autocovariance between the trailing windows ending at t and t_prime.
 *
 * Each window holds the tau + 1 points [t - tau, t]; deviations are taken from each window's own
 * mean and the sum is divided by tau. Indices address `s` directly, so callers pass a padded
 * series when windows would otherwise start before zero.
 */
[[nodiscard]] inline double windowed_autocov(const TimeSeries& s, std::size_t t, std::size_t t_prime,
                                             std::size_t tau) {
  if (tau == 0) throw InvalidArgument("window length must be positive");
  if (t < tau || t_prime < tau || t >= s.size() || t_prime >= s.size()) {
    throw InvalidArgument("window [" + std::to_string(t < tau ? 0 : t - tau) + ", " + std::to_string(t) +
                          "] or its partner at " + std::to_string(t_prime) + " lies outside the series");
  }
  double mean1 = 0.0;
  double mean2 = 0.0;
  for (std::size_t k = 0; k <= tau; ++k) {
    mean1 += s[t - k];
    mean2 += s[t_prime - k];
  }
  mean1 /= static_cast<double>(tau + 1);
  mean2 /= static_cast<double>(tau + 1);
  double acc = 0.0;
  for (std::size_t k = 0; k <= tau; ++k) acc += (s[t - k] - mean1) * (s[t_prime - k] - mean2);
  return acc / static_cast<double>(tau);
}

struct SlidingOptions {
  /// Mirror the series before index 0 so every index has a full window. When off, the matrix only
  /// covers indices tau..N-1 and has dimension N - tau.
  bool reflect = true;
};

/**
 * @brief Factor F of the sliding autocovariance matrix, Ω_τ = F Fᵀ.
 *
 * Row t of F is the mean-centred window ending at t, scaled by 1 / sqrt(tau). F has tau + 1
 * columns, which bounds the rank of Ω_τ.
 */
[[nodiscard]] inline Eigen::MatrixXd sliding_autocov_factor(const TimeSeries& s, std::size_t tau,
                                                            SlidingOptions options = {}) {
  WindowSpec::checked(tau, s.size());
  const TimeSeries padded = options.reflect ? reflect_pad(s, tau) : s;
  // Padded index of the first row whose window is complete.
  const std::size_t first = tau;
  const auto rows = static_cast<Eigen::Index>(padded.size() - first);
  const auto width = static_cast<Eigen::Index>(tau + 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(tau));
  Eigen::MatrixXd centred(rows, width);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = first + static_cast<std::size_t>(r);
    double mean = 0.0;
    for (std::size_t k = 0; k <= tau; ++k) mean += padded[t - k];
    mean /= static_cast<double>(tau + 1);
    for (Eigen::Index k = 0; k < width; ++k) {
      centred(r, k) = (padded[t - static_cast<std::size_t>(k)] - mean) * scale;
    }
  }
  return centred;
}

/**
 * @brief Sliding autocovariance matrix: windowed autocovariances for every pair of time indices.
 *
 * Computed as F Fᵀ with F from sliding_autocov_factor. The result is positive semi-definite with
 * rank at most tau, so GLS callers floor its spectrum before whitening.
 */
[[nodiscard]] inline SymmetricMatrix sliding_autocov_matrix(const TimeSeries& s, std::size_t tau,
                                                            SlidingOptions options = {}) {
  const Eigen::MatrixXd f = sliding_autocov_factor(s, tau, options);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(f.rows(), f.rows());
  omega.selfadjointView<Eigen::Lower>().rankUpdate(f);
  omega.triangularView<Eigen::StrictlyUpper>() = omega.transpose();
  return SymmetricMatrix(std::move(omega));
}

/// Stationary AR(1) autocovariance: entry (t, t') is phi^|t - t'| * sigma² / (1 - phi²).
[[nodiscard]] inline SymmetricMatrix ar1_theoretical_autocov(double phi, double sigma, std::size_t n) {
  if (!(std::abs(phi) < 1.0)) throw InvalidArgument("AR(1) coefficient must satisfy |phi| < 1");
  if (!(sigma > 0.0)) throw InvalidArgument("innovation standard deviation must be positive");
  if (n == 0) throw InvalidArgument("matrix dimension must be positive");
  const double variance = sigma * sigma / (1.0 - phi * phi);
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd out(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      out(i, j) = std::pow(phi, static_cast<double>(std::abs(i - j))) * variance;
    }
  }
  return SymmetricMatrix(std::move(out));
}

}  // namespace gls_granger
