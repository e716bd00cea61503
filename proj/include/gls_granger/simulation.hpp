#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gls_granger/error.hpp"
#include "gls_granger/time_series.hpp"

namespace gls_granger {

/// SplitMix64 finalizer; used to derive independent per-stream seeds from one master seed.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                                  std::uint64_t index) noexcept {
  return mix_seed(mix_seed(master ^ mix_seed(stream)) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

struct Ar1Config {
  double phi = 0.9;
  double sigma = 1.0;
  std::size_t n = 600;
  std::uint64_t seed = 0;
  std::size_t burn_in = 200;

  void validate() const {
    if (!(std::abs(phi) < 1.0)) throw InvalidArgument("AR(1) coefficient must satisfy |phi| < 1");
    if (!(sigma > 0.0)) throw InvalidArgument("AR(1) innovation standard deviation must be positive");
    if (n == 0) throw InvalidArgument("AR(1) length must be positive");
  }
};

/// x_t = phi x_{t-1} + e_t from x = 0, discarding the first burn_in steps.
[[nodiscard]] inline TimeSeries gen_ar1(const Ar1Config& c, std::string name = "x") {
  c.validate();
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> noise(0.0, c.sigma);
  std::vector<double> out;
  out.reserve(c.n);
  double x = 0.0;
  for (std::size_t t = 0; t < c.burn_in + c.n; ++t) {
    x = c.phi * x + noise(rng);
    if (t >= c.burn_in) out.push_back(x);
  }
  return TimeSeries(std::move(out), std::move(name));
}

enum class ResidualKind { M1_Stationary, M2_StructuralBreak, M3_Heteroskedastic };

inline const char* to_string(ResidualKind k) {
  switch (k) {
    case ResidualKind::M1_Stationary: return "m1";
    case ResidualKind::M2_StructuralBreak: return "m2";
    case ResidualKind::M3_Heteroskedastic: return "m3";
  }
  return "?";
}

/**
 * @brief Parameters of a caused series y_t = Σ_k β_k x_{t-k} + ε_t.
 *
 * M1 draws ε_t ~ N(0, σ²). M2 adds `break_shift` to ε_t for t > `break_index`. M3 uses a
 * linearly growing standard deviation σ · κ · t / N, where κ = `hetero_terminal_ratio` is the ratio
 * of the terminal standard deviation to σ.
 */
struct CausedSeriesConfig {
  std::size_t lag = 15;
  ResidualKind residual_kind = ResidualKind::M1_Stationary;
  double sigma = 1.0;
  std::optional<std::size_t> break_index;
  std::optional<double> break_shift;
  double hetero_terminal_ratio = 5.0;
  std::uint64_t seed = 0;

  /// Config with the documented defaults: mid-sample break of 3σ for M2.
  static CausedSeriesConfig with_defaults(ResidualKind kind, std::size_t lag, std::size_t n, double sigma,
                                          std::uint64_t seed) {
    CausedSeriesConfig c;
    c.lag = lag;
    c.residual_kind = kind;
    c.sigma = sigma;
    c.seed = seed;
    if (kind == ResidualKind::M2_StructuralBreak) {
      c.break_index = n / 2;
      c.break_shift = 3.0 * sigma;
    }
    return c;
  }

  void validate(std::size_t n) const {
    if (lag == 0) throw InvalidArgument("simulation lag must be positive");
    if (!(sigma > 0.0)) throw InvalidArgument("residual standard deviation must be positive");
    const bool is_break = residual_kind == ResidualKind::M2_StructuralBreak;
    if (is_break != (break_index.has_value() && break_shift.has_value())) {
      throw InvalidArgument("break index and shift are required for M2 and only for M2");
    }
    if (break_index && (*break_index == 0 || *break_index >= n)) {
      throw InvalidArgument("break index must lie strictly inside the series");
    }
    if (!(hetero_terminal_ratio > 0.0)) throw InvalidArgument("heteroskedastic ratio must be positive");
  }
};

struct CausedSeries {
  TimeSeries y;
  std::vector<double> beta;  // beta[k - 1] multiplies x_{t-k}
};

/// Residual process for a caused series; exposed so tests can inspect the noise directly.
[[nodiscard]] inline std::vector<double> gen_residual(const CausedSeriesConfig& c, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> eps(n);
  const double nd = static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double z = unit(rng);
    switch (c.residual_kind) {
      case ResidualKind::M1_Stationary:
        eps[t] = c.sigma * z;
        break;
      case ResidualKind::M2_StructuralBreak:
        eps[t] = c.sigma * z + (t > *c.break_index ? *c.break_shift : 0.0);
        break;
      case ResidualKind::M3_Heteroskedastic:
        eps[t] = c.sigma * c.hetero_terminal_ratio * (static_cast<double>(t) / nd) * z;
        break;
    }
  }
  return eps;
}

/**
 * @brief Generates a series caused by `x` at lags 1..L.
 *
 * β_k are iid Uniform(-1, 1) rescaled to unit absolute sum. The first L values of y carry noise only.
 */
[[nodiscard]] inline CausedSeries gen_caused(const TimeSeries& x, const CausedSeriesConfig& c,
                                             std::string name = "y") {
  const std::size_t n = x.size();
  if (c.lag >= n) throw InvalidArgument("simulation lag must be shorter than the driver series");
  c.validate(n);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> beta(c.lag);
  double abs_sum = 0.0;
  for (double& b : beta) {
    b = coef(rng);
    abs_sum += std::abs(b);
  }
  if (abs_sum == 0.0) {
    beta.assign(c.lag, 1.0);
    abs_sum = static_cast<double>(c.lag);
  }
  for (double& b : beta) b /= abs_sum;

  std::vector<double> y = gen_residual(c, n, rng);
  for (std::size_t t = c.lag; t < n; ++t) {
    for (std::size_t k = 1; k <= c.lag; ++k) y[t] += beta[k - 1] * x[t - k];
  }
  return {TimeSeries(std::move(y), std::move(name)), std::move(beta)};
}

/// Two independent AR(1) series. Distinct seeds are required so the innovations do not coincide.
[[nodiscard]] inline std::pair<TimeSeries, TimeSeries> gen_noncausal_pair(const Ar1Config& cx, const Ar1Config& cy) {
  if (cx.n != cy.n) throw InvalidArgument("non-causal pair needs equal lengths");
  if (cx.seed == cy.seed) throw InvalidArgument("non-causal pair needs distinct seeds");
  return {gen_ar1(cx, "x"), gen_ar1(cy, "y")};
}

}  // namespace gls_granger
