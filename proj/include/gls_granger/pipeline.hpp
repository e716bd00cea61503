#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gls_granger/autocovariance.hpp"
#include "gls_granger/error.hpp"
#include "gls_granger/inference.hpp"
#include "gls_granger/numerics.hpp"
#include "gls_granger/parallel.hpp"
#include "gls_granger/regression.hpp"
#include "gls_granger/time_series.hpp"

namespace gls_granger {

enum class TestMethod { ClassicalF, GlsWald };

inline const char* to_string(TestMethod m) { return m == TestMethod::ClassicalF ? "f" : "gls"; }

/// Where the GLS residual covariance comes from.
enum class ResidualCovariance {
  Sliding,         // sliding autocovariance of the OLS residuals, floored to SPD
  ScaledIdentity,  // s² I with s² the OLS residual variance; reduces the test to the OLS Wald test
};

/// How the sliding estimate, which has rank at most tau, is made positive definite.
enum class FloorRule {
  MeanVariance,       // eigenvalues >= variance_floor * mean residual variance
  LargestEigenvalue,  // eigenvalues >= spd_eps_rel * largest eigenvalue
};

/// Floor level, as a fraction of the mean residual variance, at which the GLS test holds its
/// nominal size on independent AR(1) pairs (n = 600, p = 15, tau = n_eff / 5).
inline constexpr double kDefaultVarianceFloor = 0.9;

struct GlsOptions {
  FloorRule floor_rule = FloorRule::MeanVariance;
  double variance_floor = kDefaultVarianceFloor;
  double spd_eps_rel = kDefaultSpdFloor;
  bool reflect = true;
  ResidualCovariance covariance = ResidualCovariance::Sliding;
};

struct CausalityResult {
  std::string cause;
  std::string effect;
  std::size_t lag = 1;
  TestMethod method = TestMethod::ClassicalF;
  TestResult test;
  std::optional<std::size_t> tau;  // set exactly when method is GlsWald
};

namespace detail {

inline void check_pair(const TimeSeries& x, const TimeSeries& y, std::size_t p) {
  if (p == 0) throw InvalidArgument("lag order must be positive");
  if (x.size() != y.size()) {
    throw InvalidArgument("series lengths differ: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (y.size() <= 3 * p + 2) {
    throw InvalidArgument("series of length " + std::to_string(y.size()) + " is too short for lag " +
                          std::to_string(p));
  }
}

inline std::string label_or(const TimeSeries& s, const char* fallback) {
  return s.name().empty() ? std::string(fallback) : s.name();
}

}  // namespace detail

/// Classical Granger F-test of "x causes y": OLS restricted vs unrestricted models on the same rows.
[[nodiscard]] inline CausalityResult classical_granger_test(const TimeSeries& x, const TimeSeries& y, std::size_t p,
                                                            double alpha = kDefaultAlpha) {
  detail::check_pair(x, y, p);
  const LaggedDesign unrestricted = build_lagged_design(y, x, p);
  const FitResult um = ols_fit(unrestricted);
  const FitResult rm = ols_fit(unrestricted.restricted());
  const FStatistic f = granger_f_statistic(rm.ssr, um.ssr, p, unrestricted.n_eff());
  return {detail::label_or(x, "x"), detail::label_or(y, "y"), p, TestMethod::ClassicalF,
          f_test_result(f.statistic, f.df1, f.df2, alpha), std::nullopt};
}

/// Everything the GLS test computes on the way to its verdict.
struct GlsTrace {
  FitResult ols;
  SymmetricMatrix omega = SymmetricMatrix::identity(1);
  FitResult gls;
  std::size_t rows_skipped = 0;  // leading design rows without a full window (reflection off)
};

/**
 * @brief Runs the feasible-GLS pipeline for "x causes y" and returns every intermediate.
 *
 * 1. OLS on the unrestricted lagged design.
 * 2. Sliding autocovariance of the OLS residuals with window tau, floored to positive definite.
 * 3. GLS refit of the same design with that covariance.
 *
 * Ω̂ is always built from the OLS residuals; there is no iteration.
 */
[[nodiscard]] inline GlsTrace gls_granger_trace(const TimeSeries& x, const TimeSeries& y, std::size_t p,
                                                std::size_t tau, const GlsOptions& options = {}) {
  detail::check_pair(x, y, p);
  const LaggedDesign design = build_lagged_design(y, x, p);
  GlsTrace trace{ols_fit(design)};
  const TimeSeries residuals = residual_series(trace.ols);
  LaggedDesign fitted_design = design;
  if (options.covariance == ResidualCovariance::ScaledIdentity) {
    const double s2 = trace.ols.ssr / static_cast<double>(trace.ols.df_resid());
    trace.omega = SymmetricMatrix::identity(static_cast<Eigen::Index>(design.n_eff())).scaled(s2);
  } else {
    WindowSpec::checked(tau, residuals.size());
    const Eigen::MatrixXd factor = sliding_autocov_factor(residuals, tau, {options.reflect});
    trace.omega = options.floor_rule == FloorRule::MeanVariance ? variance_floor_factored(factor, options.variance_floor)
                                                                : spd_floor_factored(factor, options.spd_eps_rel);
    if (!options.reflect) {
      trace.rows_skipped = tau;
      fitted_design = design.tail_rows(tau);
    }
  }
  trace.gls = gls_fit(fitted_design, trace.omega);
  return trace;
}

/**
 * @brief GLS Granger test of "x causes y" with a sliding-window residual covariance.
 *
 * The verdict comes from a Wald test of the p exogenous-lag coefficients of the GLS fit, using
 * V = (XᵀΩ̂⁻¹X)⁻¹ as fitted, against F(p, n_eff - (2p + 1)).
 */
[[nodiscard]] inline CausalityResult gls_granger_test(const TimeSeries& x, const TimeSeries& y, std::size_t p,
                                                      std::size_t tau, double alpha = kDefaultAlpha,
                                                      const GlsOptions& options = {}) {
  const GlsTrace trace = gls_granger_trace(x, y, p, tau, options);
  return {detail::label_or(x, "x"), detail::label_or(y, "y"), p, TestMethod::GlsWald,
          wald_test(trace.gls, granger_restriction(p), alpha), tau};
}

/// Window for a GLS test on a pair of series of length n at lag p: floor(fraction * (n - p)).
[[nodiscard]] inline std::size_t window_for(double tau_fraction, std::size_t n, std::size_t p) {
  if (n <= p) throw InvalidArgument("series too short for the lag");
  return WindowSpec::from_fraction(tau_fraction, n - p).tau;
}

/**
 * @brief AIC of the unrestricted model for p = 1..p_max on the common rows t >= p_max.
 *
 * AIC(p) = n ln(SSR / n) + 2 (2p + 1). Entry p - 1 of the result belongs to lag p.
 */
[[nodiscard]] inline std::vector<double> aic_curve(const TimeSeries& x, const TimeSeries& y, std::size_t p_max) {
  if (p_max == 0) throw InvalidArgument("maximum lag must be positive");
  detail::check_pair(x, y, p_max);
  std::vector<double> out;
  out.reserve(p_max);
  for (std::size_t p = 1; p <= p_max; ++p) {
    const FitResult fit = ols_fit(build_lagged_design(y, x, p, p_max));
    const auto n = static_cast<double>(fit.n_obs);
    const double ssr = std::max(fit.ssr, std::numeric_limits<double>::min());
    out.push_back(n * std::log(ssr / n) + 2.0 * static_cast<double>(2 * p + 1));
  }
  return out;
}

/// Lag in 1..p_max minimizing AIC; ties go to the smaller lag.
[[nodiscard]] inline std::size_t select_lag_aic(const TimeSeries& x, const TimeSeries& y, std::size_t p_max) {
  const std::vector<double> aic = aic_curve(x, y, p_max);
  return static_cast<std::size_t>(std::min_element(aic.begin(), aic.end()) - aic.begin()) + 1;
}

struct FixedLag {
  std::size_t p;
};
struct AutoLag {
  std::size_t p_max;
  bool global = false;  // one lag for every pair, minimizing the summed AIC
};
using LagChoice = std::variant<FixedLag, AutoLag>;

struct GraphOptions {
  TestMethod method = TestMethod::GlsWald;
  LagChoice lag = FixedLag{1};
  double tau_fraction = kBenchmarkWindowFraction;
  double alpha = kDefaultAlpha;
  bool benjamini_hochberg = false;
  GlsOptions gls;
  std::size_t threads = 0;  // 0: default_thread_count()
};

struct CausalEdge {
  std::string cause;
  std::string effect;
  double p_value;
  std::size_t lag;

  friend bool operator==(const CausalEdge&, const CausalEdge&) = default;
};

struct PairDiagnostic {
  std::string cause;
  std::string effect;
  std::string message;
};

struct CausalGraph {
  std::vector<std::string> nodes;  // sorted
  std::vector<CausalEdge> edges;   // sorted by (cause, effect)
  std::map<std::pair<std::string, std::string>, std::size_t> lag_per_pair;
  std::vector<CausalityResult> results;  // one per successfully tested ordered pair
  std::vector<PairDiagnostic> diagnostics;
  std::size_t tests_run = 0;
};

/// Runs one test in the requested direction.
[[nodiscard]] inline CausalityResult run_causality_test(const TimeSeries& cause, const TimeSeries& effect,
                                                        std::size_t p, TestMethod method, double tau_fraction,
                                                        double alpha, const GlsOptions& gls = {}) {
  if (method == TestMethod::ClassicalF) return classical_granger_test(cause, effect, p, alpha);
  return gls_granger_test(cause, effect, p, window_for(tau_fraction, effect.size(), p), alpha, gls);
}

namespace detail {

// Benjamini-Hochberg step-up adjusted p-values, in input order.
inline std::vector<double> bh_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const std::size_t i = order[r];
    running = std::min(running, p[i] * static_cast<double>(m) / static_cast<double>(r + 1));
    adjusted[i] = running;
  }
  return adjusted;
}

}  // namespace detail

/**
 * @brief Pairwise causality graph over a set of equally long, uniquely labelled series.
 *
 * Every ordered pair (a, b) with a != b is tested for "a causes b"; an edge is drawn when the test
 * rejects. Pairs are visited in label order and results are merged in that order, so the output does
 * not depend on the number of threads. A pair that fails numerically is recorded in `diagnostics`
 * and produces no edge.
 */
[[nodiscard]] inline CausalGraph build_causal_graph(const std::vector<TimeSeries>& dataset,
                                                    const GraphOptions& options = {}) {
  if (dataset.size() < 2) throw InvalidArgument("a causal graph needs at least two series");
  std::vector<const TimeSeries*> sorted;
  std::set<std::string> seen;
  for (const TimeSeries& s : dataset) {
    if (s.name().empty()) throw InvalidArgument("every series in a graph needs a label");
    if (!seen.insert(s.name()).second) throw InvalidArgument("duplicate series label '" + s.name() + "'");
    if (s.size() != dataset.front().size()) throw InvalidArgument("series '" + s.name() + "' has a different length");
    sorted.push_back(&s);
  }
  std::sort(sorted.begin(), sorted.end(), [](const TimeSeries* a, const TimeSeries* b) { return a->name() < b->name(); });

  std::vector<std::pair<const TimeSeries*, const TimeSeries*>> pairs;
  for (const TimeSeries* a : sorted) {
    for (const TimeSeries* b : sorted) {
      if (a != b) pairs.emplace_back(a, b);
    }
  }

  const std::size_t threads = options.threads == 0 ? default_thread_count() : options.threads;

  std::optional<std::size_t> global_lag;
  if (const auto* autolag = std::get_if<AutoLag>(&options.lag); autolag && autolag->global) {
    std::vector<std::vector<double>> curves(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t i) {
      try {
        curves[i] = aic_curve(*pairs[i].first, *pairs[i].second, autolag->p_max);
      } catch (const std::exception&) {
        curves[i].clear();
      }
    });
    std::vector<double> total(autolag->p_max, 0.0);
    for (const auto& c : curves) {
      for (std::size_t k = 0; k < c.size(); ++k) total[k] += c[k];
    }
    global_lag = static_cast<std::size_t>(std::min_element(total.begin(), total.end()) - total.begin()) + 1;
  }

  struct Outcome {
    std::size_t lag = 0;
    std::optional<CausalityResult> result;
    std::string error;
  };
  std::vector<Outcome> outcomes(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const auto& [cause, effect] = pairs[i];
    Outcome& out = outcomes[i];
    try {
      if (const auto* fixed = std::get_if<FixedLag>(&options.lag)) {
        out.lag = fixed->p;
      } else if (global_lag) {
        out.lag = *global_lag;
      } else {
        out.lag = select_lag_aic(*cause, *effect, std::get<AutoLag>(options.lag).p_max);
      }
      out.result = run_causality_test(*cause, *effect, out.lag, options.method, options.tau_fraction, options.alpha,
                                      options.gls);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  CausalGraph graph;
  for (const TimeSeries* s : sorted) graph.nodes.push_back(s->name());
  graph.tests_run = pairs.size();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [cause, effect] = pairs[i];
    if (outcomes[i].lag != 0) graph.lag_per_pair[{cause->name(), effect->name()}] = outcomes[i].lag;
    if (outcomes[i].result) {
      graph.results.push_back(*outcomes[i].result);
    } else {
      graph.diagnostics.push_back({cause->name(), effect->name(), outcomes[i].error});
    }
  }
  if (options.benjamini_hochberg && !graph.results.empty()) {
    std::vector<double> raw;
    for (const auto& r : graph.results) raw.push_back(r.test.p_value);
    const std::vector<double> adjusted = detail::bh_adjust(raw);
    for (std::size_t i = 0; i < graph.results.size(); ++i) {
      graph.results[i].test.p_value = adjusted[i];
      graph.results[i].test.reject = adjusted[i] < options.alpha;
    }
  }
  for (const auto& r : graph.results) {
    if (r.test.reject) graph.edges.push_back({r.cause, r.effect, r.test.p_value, r.lag});
  }
  return graph;
}

}  // namespace gls_granger
