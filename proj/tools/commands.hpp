#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gls_granger/gls_granger.hpp"

namespace gls_granger::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3, kIo = 4 };

/// Thrown for conditions that map directly onto an exit code.
struct CommandError : std::runtime_error {
  CommandError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

using Json = nlohmann::json;

inline Json to_json(const CausalityResult& r) {
  Json j;
  j["cause"] = r.cause;
  j["effect"] = r.effect;
  j["lag"] = r.lag;
  j["method"] = to_string(r.method);
  j["tau"] = r.tau ? Json(*r.tau) : Json(nullptr);
  j["statistic"] = std::isinf(r.test.statistic) ? Json("inf") : Json(r.test.statistic);
  j["df1"] = r.test.df1;
  j["df2"] = r.test.df2;
  j["p_value"] = r.test.p_value;
  j["reject"] = r.test.reject;
  j["alpha"] = r.test.alpha;
  j["verdict"] = r.cause + (r.test.reject ? " causes " : " does not cause ") + r.effect;
  return j;
}

inline Json to_json(const CausalGraph& g, TestMethod method, double alpha) {
  Json j;
  j["nodes"] = g.nodes;
  j["edges"] = Json::array();
  for (const auto& e : g.edges) {
    j["edges"].push_back({{"from", e.cause}, {"to", e.effect}, {"p_value", e.p_value}, {"lag", e.lag}});
  }
  j["diagnostics"] = Json::array();
  for (const auto& d : g.diagnostics) {
    j["diagnostics"].push_back({{"from", d.cause}, {"to", d.effect}, {"message", d.message}});
  }
  j["method"] = to_string(method);
  j["alpha"] = alpha;
  j["tests_run"] = g.tests_run;
  return j;
}

/// Reference percentages of correct verdicts, for side-by-side display: {classical, gls}.
inline std::pair<double, double> reference_row(Scenario s) {
  switch (s) {
    case Scenario::M1: return {75.0, 96.6};
    case Scenario::M2: return {57.3, 85.5};
    case Scenario::M3: return {32.6, 42.6};
    case Scenario::AR1: return {94.0, 94.7};
  }
  return {0.0, 0.0};
}

inline Json to_json(const BenchReport& r) {
  Json cfg;
  cfg["pairs"] = r.config.pairs;
  cfg["n"] = r.config.n;
  cfg["lag_sim"] = r.config.lag_sim;
  cfg["lag_test"] = r.config.lag_test;
  cfg["tau_fraction"] = r.config.tau_fraction;
  cfg["alpha"] = r.config.alpha;
  cfg["master_seed"] = r.config.master_seed;
  cfg["noise_sigma"] = r.config.noise_sigma;
  cfg["driver_phi"] = r.config.driver_phi;
  cfg["noncausal_phi"] = r.config.noncausal_phi;
  cfg["variance_floor"] = r.config.gls.variance_floor;
  Json scenarios = Json::array();
  for (Scenario s : r.config.scenarios) scenarios.push_back(to_string(s));
  cfg["scenarios"] = scenarios;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    const auto [pub_f, pub_gls] = reference_row(row.scenario);
    rows.push_back({{"scenario", to_string(row.scenario)},
                    {"description", describe(row.scenario)},
                    {"classical_correct_pct", row.classical_correct_pct},
                    {"gls_correct_pct", row.gls_correct_pct},
                    {"pair_count", row.pair_count},
                    {"classical_failures", row.classical_failures},
                    {"gls_failures", row.gls_failures},
                    {"reference_classical_pct", pub_f},
                    {"reference_gls_pct", pub_gls}});
  }
  return {{"config", cfg}, {"rows", rows}};
}

inline void print_bench_table(std::ostream& out, const BenchReport& r) {
  out << std::left << std::setw(36) << "simulation procedure" << std::right << std::setw(14) << "classical %"
      << std::setw(10) << "GLS %" << std::setw(18) << "reference F %" << std::setw(16) << "reference GLS %"
      << "\n";
  out << std::string(94, '-') << "\n";
  out << std::fixed << std::setprecision(1);
  for (const auto& row : r.rows) {
    const auto [pub_f, pub_gls] = reference_row(row.scenario);
    out << std::left << std::setw(36) << describe(row.scenario) << std::right << std::setw(14)
        << row.classical_correct_pct << std::setw(10) << row.gls_correct_pct << std::setw(18) << pub_f
        << std::setw(16) << pub_gls << "\n";
  }
  out << std::defaultfloat;
  for (const auto& row : r.rows) {
    if (row.classical_failures + row.gls_failures > 0) {
      out << describe(row.scenario) << ": " << row.classical_failures << " classical and " << row.gls_failures
          << " GLS numerical failures, scored as incorrect\n";
    }
  }
  out << "pairs=" << r.config.pairs << " n=" << r.config.n << " L=" << r.config.lag_sim << " p=" << r.config.lag_test
      << " tau-frac=" << r.config.tau_fraction << " alpha=" << r.config.alpha << " seed=" << r.config.master_seed
      << "\n";
}

inline void write_matrix_csv(const std::string& path, const SymmetricMatrix& m) {
  std::ofstream out(path);
  if (!out) throw CommandError(kIo, "cannot write '" + path + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.dim(); ++i) {
    for (Eigen::Index j = 0; j < m.dim(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  if (!out) throw CommandError(kIo, "failed writing '" + path + "'");
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError(kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) throw CommandError(kIo, "failed writing '" + path + "'");
}

struct InputFlags {
  std::string path;
  bool no_header = false;
  std::string date_column;
  char delimiter = ',';
  std::size_t diff = 0;

  void add_to(CLI::App& app) {
    app.add_option("-i,--input", path, "CSV file with one numeric column per series")->required();
    app.add_flag("--no-header", no_header, "Treat the first row as data and name columns col0, col1, ...");
    app.add_option("--date-column", date_column, "Name of a label column to ignore for the math");
    app.add_option("--delimiter", delimiter, "Field delimiter");
    app.add_option("--diff", diff, "Difference every series this many times before testing");
  }

  [[nodiscard]] Dataset load() const {
    CsvOptions opts;
    opts.has_header = !no_header;
    if (!date_column.empty()) opts.date_column = date_column;
    opts.delimiter = delimiter;
    if (!std::ifstream(path)) throw CommandError(kIo, "cannot read '" + path + "'");
    return ingest_csv(path, opts).differenced(diff);
  }
};

struct GlsFlags {
  double variance_floor = kDefaultVarianceFloor;
  std::optional<double> spd_eps;
  bool no_reflect = false;

  void add_to(CLI::App& app) {
    app.add_option("--variance-floor", variance_floor,
                   "Floor for the residual covariance spectrum, as a fraction of the mean residual variance");
    app.add_option("--spd-eps", spd_eps, "Floor the spectrum at this fraction of the largest eigenvalue instead");
    app.add_flag("--no-reflect", no_reflect, "Do not mirror residuals before index 0; drops the first tau rows");
  }

  [[nodiscard]] GlsOptions options() const {
    GlsOptions o;
    o.variance_floor = variance_floor;
    if (spd_eps) {
      o.floor_rule = FloorRule::LargestEigenvalue;
      o.spd_eps_rel = *spd_eps;
    }
    o.reflect = !no_reflect;
    return o;
  }
};

inline std::optional<TestMethod> parse_method(const std::string& s) {
  if (s == "f") return TestMethod::ClassicalF;
  if (s == "gls") return TestMethod::GlsWald;
  return std::nullopt;
}

inline std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

inline int run_test(const InputFlags& in, const GlsFlags& gls, const std::string& cause_label,
                    const std::string& effect_label, std::size_t lag, std::size_t auto_lag, const std::string& method_name,
                    double tau_frac, double alpha, bool json, const std::string& dump_cov, std::ostream& out) {
  const auto method = parse_method(method_name);
  if (!method) throw CommandError(kUsage, "unknown method '" + method_name + "' (expected f or gls)");
  const Dataset data = in.load();
  const TimeSeries* cause = data.find(cause_label);
  const TimeSeries* effect = data.find(effect_label);
  if (!cause || !effect) {
    throw CommandError(kUsage, "unknown series '" + (cause ? effect_label : cause_label) +
                                   "'; available: " + join(data.labels(), ", "));
  }
  const std::size_t p = auto_lag > 0 ? select_lag_aic(*cause, *effect, auto_lag) : lag;
  const CausalityResult r = run_causality_test(*cause, *effect, p, *method, tau_frac, alpha, gls.options());
  if (!dump_cov.empty()) {
    if (*method != TestMethod::GlsWald) throw CommandError(kUsage, "--dump-cov needs --method gls");
    write_matrix_csv(dump_cov, gls_granger_trace(*cause, *effect, p, *r.tau, gls.options()).omega);
  }
  if (json) {
    out << to_json(r).dump(2) << "\n";
    return kOk;
  }
  out << r.cause << " -> " << r.effect << "  method=" << to_string(r.method) << " lag=" << r.lag;
  if (r.tau) out << " tau=" << *r.tau;
  out << "\n";
  out << "statistic  F(" << r.test.df1 << ", " << r.test.df2 << ") = " << r.test.statistic << "\n";
  out << "p-value    " << r.test.p_value << "\n";
  out << "verdict    " << r.cause << (r.test.reject ? " causes " : " does not cause ") << r.effect << " (alpha "
      << r.test.alpha << ")\n";
  return kOk;
}

inline int run_graph(const InputFlags& in, const GlsFlags& gls, const std::string& method_name, std::size_t lag,
                     std::size_t auto_lag, bool global_lag, double tau_frac, double alpha, bool bh,
                     const std::string& out_dot, const std::string& out_json, std::ostream& out) {
  const auto method = parse_method(method_name);
  if (!method) throw CommandError(kUsage, "unknown method '" + method_name + "' (expected f or gls)");
  const Dataset data = in.load();
  if (data.columns().size() < 2) throw CommandError(kUsage, "a causal graph needs at least two series");
  GraphOptions opts;
  opts.method = *method;
  opts.lag = auto_lag > 0 ? LagChoice{AutoLag{auto_lag, global_lag}} : LagChoice{FixedLag{lag}};
  opts.tau_fraction = tau_frac;
  opts.alpha = alpha;
  opts.benjamini_hochberg = bh;
  opts.gls = gls.options();
  const CausalGraph graph = build_causal_graph(data.columns(), opts);
  const std::string dot = to_dot(graph);
  if (!out_dot.empty()) write_text(out_dot, dot);
  if (!out_json.empty()) write_text(out_json, to_json(graph, *method, alpha).dump(2) + "\n");
  if (out_dot.empty() && out_json.empty()) {
    out << dot;
  } else {
    out << graph.edges.size() << " edges over " << graph.nodes.size() << " series (" << graph.tests_run
        << " tests)\n";
  }
  for (const auto& d : graph.diagnostics) out << "warning: " << d.cause << " -> " << d.effect << ": " << d.message << "\n";
  return kOk;
}

inline int run_simulate(const std::string& scenario_name, std::size_t n, std::size_t lag, std::uint64_t seed,
                        double sigma, const std::string& path, const std::string& dump_cov, double tau_frac,
                        std::ostream& out) {
  const auto scenario = parse_scenario(scenario_name);
  if (!scenario) throw CommandError(kUsage, "unknown scenario '" + scenario_name + "' (expected m1, m2, m3 or ar1)");
  BenchConfig cfg;
  cfg.n = n;
  cfg.lag_sim = lag;
  cfg.lag_test = lag;
  cfg.master_seed = seed;
  cfg.noise_sigma = sigma;
  if (n <= lag) throw CommandError(kUsage, "--n must exceed --lag");
  const BenchPair pair = make_bench_pair(cfg, *scenario, 0);

  Json meta;
  meta["scenario"] = to_string(*scenario);
  meta["seed"] = seed;
  meta["n"] = n;
  meta["lag"] = lag;
  meta["driver"] = {{"phi", cfg.driver_phi}, {"sigma", 1.0}, {"burn_in", cfg.burn_in}};
  if (*scenario == Scenario::AR1) {
    meta["response"] = {{"phi", cfg.noncausal_phi}, {"sigma", 1.0}, {"burn_in", cfg.burn_in}};
    meta["beta"] = Json::array();
  } else {
    // Regenerate to recover β; generation is a pure function of the seed.
    const std::uint64_t seed_y = derive_seed(seed, 2 * static_cast<std::uint64_t>(*scenario) + 1, 0);
    const auto kind = *scenario == Scenario::M1   ? ResidualKind::M1_Stationary
                      : *scenario == Scenario::M2 ? ResidualKind::M2_StructuralBreak
                                                  : ResidualKind::M3_Heteroskedastic;
    const auto c = CausedSeriesConfig::with_defaults(kind, lag, n, sigma, seed_y);
    meta["beta"] = gen_caused(pair.x, c).beta;
    meta["residual"] = {{"kind", to_string(kind)}, {"sigma", sigma}};
    if (c.break_index) {
      meta["residual"]["break_index"] = *c.break_index;
      meta["residual"]["break_shift"] = *c.break_shift;
    }
    if (kind == ResidualKind::M3_Heteroskedastic) meta["residual"]["terminal_sd_ratio"] = c.hetero_terminal_ratio;
  }

  std::ostringstream csv;
  write_csv(csv, Dataset({pair.x, pair.y}));
  write_text(path, csv.str());
  write_text(path + ".meta.json", meta.dump(2) + "\n");
  if (!dump_cov.empty()) {
    write_matrix_csv(dump_cov, sliding_autocov_matrix(pair.x, WindowSpec::from_fraction(tau_frac, n).tau));
  }
  out << "wrote " << path << " (" << n << " rows) and " << path << ".meta.json\n";
  return kOk;
}

inline std::vector<Scenario> parse_scenarios(const std::string& list) {
  std::vector<Scenario> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto s = parse_scenario(item);
    if (!s) throw CommandError(kUsage, "unknown scenario '" + item + "'");
    out.push_back(*s);
  }
  if (out.empty()) throw CommandError(kUsage, "no scenarios given");
  return out;
}

/**
 * @brief Entry point shared by the executable and the tests.
 *
 * Exit codes: 0 success, 2 usage or data error, 3 numerical failure, 4 output I/O failure.
 */
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Granger causality with classical F-tests and sliding-covariance GLS", "gls-granger"};
  app.require_subcommand(1);

  // test
  auto* test = app.add_subcommand("test", "Test whether one series Granger-causes another");
  InputFlags test_in;
  GlsFlags test_gls;
  std::string cause, effect, test_method = "gls", test_dump;
  std::size_t test_lag = 1, test_auto = 0;
  double test_tau = kBenchmarkWindowFraction, test_alpha = kDefaultAlpha;
  bool test_json = false;
  test->add_option("cause", cause, "Label of the candidate cause")->required();
  test->add_option("effect", effect, "Label of the candidate effect")->required();
  test_in.add_to(*test);
  test_gls.add_to(*test);
  test->add_option("--lag", test_lag, "Lag order p")->check(CLI::PositiveNumber);
  test->add_option("--auto-lag", test_auto, "Choose p in 1..P by AIC");
  test->add_option("--method", test_method, "f (classical) or gls");
  test->add_option("--tau-frac", test_tau, "Sliding window as a fraction of the usable rows");
  test->add_option("--alpha", test_alpha, "Significance level");
  test->add_flag("--json", test_json, "Print a JSON record");
  test->add_option("--dump-cov", test_dump, "Write the estimated residual covariance as a CSV matrix");

  // graph
  auto* graph = app.add_subcommand("graph", "Build a causal graph over every pair of series");
  InputFlags graph_in;
  GlsFlags graph_gls;
  std::string graph_method = "gls", out_dot, out_json;
  std::size_t graph_lag = 1, graph_auto = 0;
  bool global_lag = false, bh = false;
  double graph_tau = kBenchmarkWindowFraction, graph_alpha = kDefaultAlpha;
  graph_in.add_to(*graph);
  graph_gls.add_to(*graph);
  graph->add_option("--method", graph_method, "f (classical) or gls");
  graph->add_option("--lag", graph_lag, "Lag order p for every pair")->check(CLI::PositiveNumber);
  graph->add_option("--auto-lag", graph_auto, "Choose p in 1..P by AIC for each pair");
  graph->add_flag("--global-lag", global_lag, "With --auto-lag, use one lag minimizing the summed AIC");
  graph->add_option("--tau-frac", graph_tau, "Sliding window as a fraction of the usable rows");
  graph->add_option("--alpha", graph_alpha, "Significance level");
  graph->add_flag("--bh", bh, "Benjamini-Hochberg adjustment across all pairs");
  graph->add_option("--out-dot", out_dot, "Write the graph in DOT syntax");
  graph->add_option("--out-json", out_json, "Write the graph as JSON");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic (x, y) pair");
  std::string sim_scenario = "m1", sim_out, sim_dump;
  std::size_t sim_n = 600, sim_lag = 15;
  std::uint64_t sim_seed = 1;
  double sim_sigma = kDefaultNoiseSigma, sim_tau = kDiagnosticWindowFraction;
  simulate->add_option("--scenario", sim_scenario, "m1, m2, m3 or ar1");
  simulate->add_option("--n", sim_n, "Series length")->check(CLI::PositiveNumber);
  simulate->add_option("--lag", sim_lag, "Causal lag L")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Seed");
  simulate->add_option("--sigma", sim_sigma, "Residual standard deviation of y")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim_out, "Output CSV path")->required();
  simulate->add_option("--dump-cov", sim_dump, "Write the sliding autocovariance matrix of x as CSV");
  simulate->add_option("--tau-frac", sim_tau, "Window fraction for --dump-cov");

  // bench
  auto* bench = app.add_subcommand("bench", "Compare classical and GLS tests on simulated pairs");
  BenchConfig bench_cfg;
  std::string bench_scenarios = "m1,m2,m3,ar1";
  bool bench_json = false;
  double bench_floor = kDefaultVarianceFloor;
  bench->add_option("--pairs", bench_cfg.pairs, "Pairs per scenario")->check(CLI::PositiveNumber);
  bench->add_option("--n", bench_cfg.n, "Series length")->check(CLI::PositiveNumber);
  bench->add_option("--lag", bench_cfg.lag_sim, "Simulation and test lag")->check(CLI::PositiveNumber);
  bench->add_option("--tau-frac", bench_cfg.tau_fraction, "Sliding window as a fraction of the usable rows");
  bench->add_option("--alpha", bench_cfg.alpha, "Significance level");
  bench->add_option("--seed", bench_cfg.master_seed, "Master seed");
  bench->add_option("--sigma", bench_cfg.noise_sigma, "Residual standard deviation of caused series");
  bench->add_option("--variance-floor", bench_floor, "GLS covariance floor (fraction of mean residual variance)");
  bench->add_option("--scenarios", bench_scenarios, "Comma-separated subset of m1,m2,m3,ar1");
  bench->add_flag("--json", bench_json, "Print a JSON record instead of the table");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (test->parsed()) {
      return run_test(test_in, test_gls, cause, effect, test_lag, test_auto, test_method, test_tau, test_alpha,
                      test_json, test_dump, out);
    }
    if (graph->parsed()) {
      return run_graph(graph_in, graph_gls, graph_method, graph_lag, graph_auto, global_lag, graph_tau, graph_alpha,
                       bh, out_dot, out_json, out);
    }
    if (simulate->parsed()) {
      return run_simulate(sim_scenario, sim_n, sim_lag, sim_seed, sim_sigma, sim_out, sim_dump, sim_tau, out);
    }
    if (bench->parsed()) {
      bench_cfg.lag_test = bench_cfg.lag_sim;
      bench_cfg.scenarios = parse_scenarios(bench_scenarios);
      bench_cfg.gls.variance_floor = bench_floor;
      const BenchReport report = run_benchmark(bench_cfg);
      if (bench_json) {
        out << to_json(report).dump(2) << "\n";
      } else {
        print_bench_table(out, report);
        out << "wall time " << std::fixed << std::setprecision(1) << report.wall_seconds << " s\n";
      }
      return kOk;
    }
  } catch (const CommandError& e) {
    err << "error: " << e.what() << "\n";
    return e.code;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace gls_granger::cli
