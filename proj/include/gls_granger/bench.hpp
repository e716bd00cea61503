#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gls_granger/error.hpp"
#include "gls_granger/parallel.hpp"
#include "gls_granger/pipeline.hpp"
#include "gls_granger/simulation.hpp"

namespace gls_granger {

enum class Scenario { M1, M2, M3, AR1 };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::M1: return "m1";
    case Scenario::M2: return "m2";
    case Scenario::M3: return "m3";
    case Scenario::AR1: return "ar1";
  }
  return "?";
}

inline const char* describe(Scenario s) {
  switch (s) {
    case Scenario::M1: return "(M1) stationary residual";
    case Scenario::M2: return "(M2) structural breaks residual";
    case Scenario::M3: return "(M3) heteroskedastic residual";
    case Scenario::AR1: return "(AR1) not caused";
  }
  return "?";
}

inline std::optional<Scenario> parse_scenario(const std::string& name) {
  if (name == "m1") return Scenario::M1;
  if (name == "m2") return Scenario::M2;
  if (name == "m3") return Scenario::M3;
  if (name == "ar1") return Scenario::AR1;
  return std::nullopt;
}

[[nodiscard]] inline bool is_causal(Scenario s) noexcept { return s != Scenario::AR1; }

/// Residual σ of the caused series.
inline constexpr double kDefaultNoiseSigma = 2.5;

/// Knobs of the simulated comparison.
struct BenchConfig {
  std::size_t pairs = 150;
  std::size_t n = 600;
  std::size_t lag_sim = 15;
  std::size_t lag_test = 15;
  double tau_fraction = kBenchmarkWindowFraction;
  double alpha = kDefaultAlpha;
  std::uint64_t master_seed = 20231;
  std::vector<Scenario> scenarios{Scenario::M1, Scenario::M2, Scenario::M3, Scenario::AR1};

  // Data-generating parameters.
  double driver_phi = 0.9;       // AR(1) driver of caused pairs; also x of the non-causal pairs
  double noncausal_phi = 0.5;    // AR(1) coefficient of y in the non-causal pairs
  double noise_sigma = kDefaultNoiseSigma;  // σ of the caused series' residual
  std::size_t burn_in = 200;

  GlsOptions gls;
  std::size_t threads = 0;  // 0: default_thread_count()

  void validate() const {
    if (pairs == 0) throw InvalidArgument("benchmark needs at least one pair");
    if (!(tau_fraction > 0.0 && tau_fraction < 1.0)) throw InvalidArgument("window fraction must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("significance level must lie in (0, 1)");
    if (lag_sim == 0 || lag_test == 0) throw InvalidArgument("lags must be positive");
    if (n <= 3 * lag_test + 2 || n <= lag_sim) throw InvalidArgument("series too short for the configured lags");
    if (scenarios.empty()) throw InvalidArgument("benchmark needs at least one scenario");
  }
};

struct BenchRow {
  Scenario scenario;
  double classical_correct_pct = 0.0;
  double gls_correct_pct = 0.0;
  std::size_t pair_count = 0;
  std::size_t classical_failures = 0;
  std::size_t gls_failures = 0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchRow> rows;
  double wall_seconds = 0.0;
};

/// Percentage of verdicts equal to `truth`.
[[nodiscard]] inline double accuracy(const std::vector<bool>& verdicts, bool truth) {
  if (verdicts.empty()) throw InvalidArgument("accuracy of an empty verdict list is undefined");
  std::size_t hits = 0;
  for (bool v : verdicts) hits += v == truth ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(verdicts.size());
}

/// A generated benchmark pair; x is the candidate cause and y the candidate effect.
struct BenchPair {
  TimeSeries x;
  TimeSeries y;
};

/// Pair `index` of `scenario`, a pure function of the config and its master seed.
[[nodiscard]] inline BenchPair make_bench_pair(const BenchConfig& cfg, Scenario scenario, std::size_t index) {
  const auto stream = static_cast<std::uint64_t>(scenario);
  const std::uint64_t seed_x = derive_seed(cfg.master_seed, 2 * stream, index);
  const std::uint64_t seed_y = derive_seed(cfg.master_seed, 2 * stream + 1, index);
  TimeSeries x = gen_ar1({cfg.driver_phi, 1.0, cfg.n, seed_x, cfg.burn_in}, "x");
  if (scenario == Scenario::AR1) {
    auto [a, b] = gen_noncausal_pair({cfg.driver_phi, 1.0, cfg.n, seed_x, cfg.burn_in},
                                     {cfg.noncausal_phi, 1.0, cfg.n, seed_y, cfg.burn_in});
    return {std::move(a), std::move(b)};
  }
  const auto kind = scenario == Scenario::M1   ? ResidualKind::M1_Stationary
                    : scenario == Scenario::M2 ? ResidualKind::M2_StructuralBreak
                                               : ResidualKind::M3_Heteroskedastic;
  const auto c = CausedSeriesConfig::with_defaults(kind, cfg.lag_sim, cfg.n, cfg.noise_sigma, seed_y);
  TimeSeries y = gen_caused(x, c, "y").y;
  return {std::move(x), std::move(y)};
}

/**
 * @brief Runs the classical and GLS tests on the same generated pairs for every scenario.
 *
 * A verdict is correct when it rejects exactly for the causal scenarios. Each pair is tested in
 * the x → y direction only. A test that throws counts as incorrect for its method.
 */
[[nodiscard]] inline BenchReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
  const std::size_t tau = window_for(cfg.tau_fraction, cfg.n, cfg.lag_test);

  struct Verdict {
    bool classical_causal = false;
    bool gls_causal = false;
    bool classical_failed = false;
    bool gls_failed = false;
  };

  BenchReport report{cfg, {}, 0.0};
  for (Scenario scenario : cfg.scenarios) {
    const bool truth = is_causal(scenario);
    std::vector<Verdict> verdicts(cfg.pairs);
    parallel_for(cfg.pairs, threads, [&](std::size_t i) {
      const BenchPair pair = make_bench_pair(cfg, scenario, i);
      Verdict& v = verdicts[i];
      try {
        v.classical_causal = classical_granger_test(pair.x, pair.y, cfg.lag_test, cfg.alpha).test.reject;
      } catch (const std::exception&) {
        v.classical_failed = true;
      }
      try {
        v.gls_causal = gls_granger_test(pair.x, pair.y, cfg.lag_test, tau, cfg.alpha, cfg.gls).test.reject;
      } catch (const std::exception&) {
        v.gls_failed = true;
      }
    });
    BenchRow row{scenario};
    row.pair_count = cfg.pairs;
    std::vector<bool> classical;
    std::vector<bool> gls;
    for (const Verdict& v : verdicts) {
      classical.push_back(v.classical_failed ? !truth : v.classical_causal);
      gls.push_back(v.gls_failed ? !truth : v.gls_causal);
      row.classical_failures += v.classical_failed ? 1 : 0;
      row.gls_failures += v.gls_failed ? 1 : 0;
    }
    row.classical_correct_pct = accuracy(classical, truth);
    row.gls_correct_pct = accuracy(gls, truth);
    report.rows.push_back(row);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace gls_granger
