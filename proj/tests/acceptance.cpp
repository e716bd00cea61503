#include <boost/math/distributions/fisher_f.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "oracles.hpp"

using namespace gls_granger;

namespace {

namespace tol {
inline constexpr double kWaldVsF = 1e-8;
inline constexpr double kGlsVsOls = 1e-10;
inline constexpr double kSlidingFrobenius = 0.5;
inline constexpr double kSlidingSignAgreement = 0.90;
inline constexpr double kM1GlsFloor = 85.0;
inline constexpr double kM2Margin = 10.0;
inline constexpr double kAr1Floor = 88.0;
inline constexpr double kFCdf = 1e-8;
inline constexpr double kNominalSize = 0.05;
inline constexpr double kSizeBand = 0.03;
inline constexpr double kPlantedRecall = 0.80;
inline constexpr double kMeanSpurious = 0.5;
}  // namespace tol

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

Outcome wald_equals_f() {
  std::mt19937_64 seeds(101);
  double worst = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    const std::size_t n = i % 2 ? 120 : 60;
    const std::size_t p = 1 + (i / 2) % 3;
    const TimeSeries x = gen_ar1({0.7, 1.0, n, seeds(), 50}, "x");
    TimeSeries y = gen_ar1({0.4, 1.0, n, seeds(), 50}, "y");
    if (i % 3 == 0) {
      y = gen_caused(x, CausedSeriesConfig::with_defaults(ResidualKind::M1_Stationary, p, n, 1.0, seeds())).y;
    }
    const LaggedDesign d = build_lagged_design(y, x, p);
    const TestResult wald = wald_test(ols_fit(d), granger_restriction(p));

    const Eigen::MatrixXd restricted = d.restricted().matrix();
    const double ssr_u = oracle::ssr_qr(d.matrix(), d.response());
    const double ssr_r = oracle::ssr_qr(restricted, d.response());
    const double df1 = static_cast<double>(p);
    const double df2 = static_cast<double>(d.n_eff() - 2 * p - 1);
    const double f = ((ssr_r - ssr_u) / df1) / (ssr_u / df2);
    const double p_ref = boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), std::max(f, 0.0)));
    worst = std::max(worst, std::abs(wald.p_value - p_ref));
  }
  std::ostringstream s;
  s << "max |p_wald - p_F| = " << worst << " over 200 instances (tol " << tol::kWaldVsF << ")";
  return {worst <= tol::kWaldVsF, s.str()};
}

Outcome gls_identity_equals_ols() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> rows_dist(10, 200), cols_dist(1, 8);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int cols = cols_dist(rng);
    const int rows = std::max(rows_dist(rng), cols + 2);
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) x(i, j) = z(rng);
      y(i) = z(rng);
    }
    const FitResult ols = ols_fit(x, y);
    const FitResult gls = gls_fit(x, y, SymmetricMatrix::identity(rows));
    worst = std::max(worst, (ols.coefficients - gls.coefficients).cwiseAbs().maxCoeff());
  }
  std::ostringstream s;
  s << "max coefficient gap = " << worst << " over 100 designs (tol " << tol::kGlsVsOls << ")";
  return {worst <= tol::kGlsVsOls, s.str()};
}

Outcome sliding_consistency() {
  const std::size_t n = 600, tau = 200, band = 10;
  const Eigen::MatrixXd truth = ar1_theoretical_autocov(0.9, 1.0, n).matrix();
  double frob = 0.0;
  std::size_t agree = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const TimeSeries x = gen_ar1({0.9, 1.0, n, derive_seed(303, 0, seed), 200});
    const Eigen::MatrixXd est = sliding_autocov_matrix(x, tau).matrix();
    frob += (est - truth).norm() / truth.norm();
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t u = t > band ? t - band : 0; u <= std::min(n - 1, t + band); ++u) {
        const auto i = static_cast<Eigen::Index>(t), j = static_cast<Eigen::Index>(u);
        agree += (est(i, j) > 0) == (truth(i, j) > 0);
        ++total;
      }
    }
  }
  frob /= 10.0;
  const double sign = static_cast<double>(agree) / static_cast<double>(total);
  std::ostringstream s;
  s << "mean relative Frobenius error = " << frob << " (tol " << tol::kSlidingFrobenius
    << "), band sign agreement = " << sign << " (min " << tol::kSlidingSignAgreement << ")";
  return {frob <= tol::kSlidingFrobenius && sign >= tol::kSlidingSignAgreement, s.str()};
}

Outcome benchmark_battery() {
  const BenchReport report = run_benchmark(BenchConfig{});
  std::ostringstream table;
  cli::print_bench_table(table, report);
  std::cout << table.str();
  std::map<Scenario, BenchRow> rows;
  for (const auto& r : report.rows) rows[r.scenario] = r;
  const BenchRow& m1 = rows.at(Scenario::M1);
  const BenchRow& m2 = rows.at(Scenario::M2);
  const BenchRow& m3 = rows.at(Scenario::M3);
  const BenchRow& ar1 = rows.at(Scenario::AR1);
  const bool a = m1.gls_correct_pct >= m1.classical_correct_pct && m1.gls_correct_pct >= tol::kM1GlsFloor;
  const bool b = m2.gls_correct_pct >= m2.classical_correct_pct + tol::kM2Margin;
  const bool c = m3.gls_correct_pct >= m3.classical_correct_pct;
  const bool d = ar1.classical_correct_pct >= tol::kAr1Floor && ar1.gls_correct_pct >= tol::kAr1Floor;
  auto mark = [](bool ok) { return ok ? "pass" : "FAIL"; };
  std::ostringstream s;
  s << "(a) M1 " << mark(a) << ", (b) M2 " << mark(b) << ", (c) M3 " << mark(c) << ", (d) AR1 " << mark(d)
    << "; wall " << std::fixed << std::setprecision(1) << report.wall_seconds << " s";
  return {a && b && c && d, s.str()};
}

Outcome f_cdf_accuracy() {
  const std::vector<double> xs{0.1, 0.5, 1.0, 3.0, 10.0};
  const std::vector<std::pair<double, double>> dfs{{1, 5}, {3, 30}, {15, 120}, {1, 120}, {15, 5}, {3, 5}};
  double worst = 0.0;
  std::size_t points = 0;
  for (const auto& [d1, d2] : dfs) {
    for (double x : xs) {
      worst = std::max(worst, std::abs(f_cdf(x, d1, d2) - oracle::f_cdf_quadrature(x, d1, d2)));
      ++points;
    }
  }
  std::ostringstream s;
  s << "max |f_cdf - quadrature| = " << worst << " over " << points << " points (tol " << tol::kFCdf << ")";
  return {worst <= tol::kFCdf && points == 30, s.str()};
}

Outcome null_size() {
  BenchConfig cfg;
  cfg.pairs = 500;
  cfg.master_seed = 606;
  cfg.scenarios = {Scenario::AR1};
  const BenchReport report = run_benchmark(cfg);
  const BenchRow& row = report.rows.front();
  const double f_rate = 1.0 - row.classical_correct_pct / 100.0;
  const double gls_rate = 1.0 - row.gls_correct_pct / 100.0;
  auto in_band = [](double r) { return std::abs(r - tol::kNominalSize) <= tol::kSizeBand; };
  std::ostringstream s;
  s << "rejection rate classical = " << f_rate << ", GLS = " << gls_rate << " (target " << tol::kNominalSize
    << " +/- " << tol::kSizeBand << ")";
  return {in_band(f_rate) && in_band(gls_rate), s.str()};
}

std::string bench_json() {
  std::ostringstream out, err;
  const int code = cli::run({"bench", "--json", "--seed", "707"}, out, err);
  if (code != 0) throw std::runtime_error("bench exited with " + std::to_string(code) + ": " + err.str());
  return out.str();
}

Outcome determinism() {
  const char* saved = std::getenv("GRANGER_THREADS");
  const std::string keep = saved ? saved : "";
  ::setenv("GRANGER_THREADS", "1", 1);
  const std::string first = bench_json();
  const std::string second = bench_json();
  ::setenv("GRANGER_THREADS", "4", 1);
  const std::string four = bench_json();
  if (saved) {
    ::setenv("GRANGER_THREADS", keep.c_str(), 1);
  } else {
    ::unsetenv("GRANGER_THREADS");
  }
  const bool same = first == second && first == four;
  return {same, std::string("bench --json identical across two runs and GRANGER_THREADS=1/4: ") + (same ? "yes" : "no") +
                    " (" + std::to_string(first.size()) + " bytes)"};
}

Outcome graph_recovery() {
  const std::size_t n = 600, lag = 2, seeds = 50;
  std::size_t planted = 0, spurious = 0;
  for (std::size_t s = 0; s < seeds; ++s) {
    const TimeSeries x = gen_ar1({0.5, 1.0, n, derive_seed(808, 0, s), 200}, "x");
    const TimeSeries z = gen_ar1({0.5, 1.0, n, derive_seed(808, 1, s), 200}, "z");
    auto c = CausedSeriesConfig::with_defaults(ResidualKind::M1_Stationary, lag, n, 0.5, derive_seed(808, 2, s));
    const TimeSeries y = gen_caused(x, c, "y").y;
    GraphOptions opts;
    opts.lag = FixedLag{lag};
    const CausalGraph g = build_causal_graph({x, y, z}, opts);
    for (const auto& e : g.edges) {
      if (e.cause == "x" && e.effect == "y") {
        ++planted;
      } else {
        ++spurious;
      }
    }
  }
  const double recall = static_cast<double>(planted) / static_cast<double>(seeds);
  const double mean_spurious = static_cast<double>(spurious) / static_cast<double>(seeds);
  std::ostringstream s;
  s << "planted edge found in " << recall * 100.0 << "% of runs (min " << tol::kPlantedRecall * 100.0
    << "%), mean spurious edges = " << mean_spurious << " (max " << tol::kMeanSpurious << ")";
  return {recall >= tol::kPlantedRecall && mean_spurious <= tol::kMeanSpurious, s.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 wald-f-equivalence", wald_equals_f},
      {"2 gls-identity-degeneracy", gls_identity_equals_ols},
      {"3 sliding-autocov-consistency", sliding_consistency},
      {"4 benchmark-battery", benchmark_battery},
      {"5 f-cdf-accuracy", f_cdf_accuracy},
      {"6 null-size", null_size},
      {"7 bench-determinism", determinism},
      {"8 graph-recovery", graph_recovery},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << std::fixed
              << std::setprecision(2) << secs << " s]" << std::defaultfloat << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
