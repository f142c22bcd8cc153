// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "rismtc/experiment.hpp"
#include "rismtc/scenario.hpp"

namespace rismtc::cli {

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string axis;
  std::vector<std::string> strategies;
  std::vector<std::string> protocols;
  int threads = 0;
  bool verbose = false;
  bool timing = false;
  std::string log;
  std::vector<int> motes;
  std::vector<int> sizes{10, 15, 20};
  int repetitions = 3;
};

Config load_config(const Options& o) {
  return o.config.empty() ? Config::parse("", "<defaults>") : Config::load(o.config);
}

std::uint64_t resolve_seed(const Options& o, const Config& cfg) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("RIS_SIM_SEED")) {
    try {
      return static_cast<std::uint64_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw ConfigError(std::string("RIS_SIM_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return static_cast<std::uint64_t>(cfg.get_int("experiment", "seed", 42));
}

int resolve_threads(const Options& o) {
  if (o.threads > 0) return o.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parse_axis(const std::string& text, ExperimentSpec& spec) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("--axis expects NAME=v1,v2,...");
  spec.axis = trim(text.substr(0, eq));
  spec.values.clear();
  for (const auto& v : split(text.substr(eq + 1), ',')) spec.values.push_back(parse_double(v, "--axis"));
  if (spec.values.empty()) throw ConfigError("--axis needs at least one value");
  if (spec.axis != "L" && spec.axis != "M" && spec.axis != "K" && spec.axis != "n_c")
    throw ConfigError("--axis name must be one of L, M, K, n_c");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

int run_experiment(const Options& o, bool sweep) {
  const Config cfg = load_config(o);
  ExperimentSpec spec = experiment_from_config(cfg);
  spec.seed = resolve_seed(o, cfg);
  if (o.trials) spec.report_trials = *o.trials;
  if (spec.report_trials < 1) throw ConfigError("--trials must be at least 1");
  if (sweep) {
    if (!o.axis.empty()) parse_axis(o.axis, spec);
    if (spec.axis.empty() || spec.values.empty()) throw ConfigError("sweep needs --axis or experiment.axis/values");
  } else {
    spec.axis.clear();
    spec.values.clear();
  }
  if (!o.strategies.empty()) {
    spec.strategies.clear();
    for (const auto& s : o.strategies) spec.strategies.push_back(parse_strategy_spec(s));
  }
  if (!o.protocols.empty()) {
    spec.protocols.clear();
    for (const auto& p : o.protocols) spec.protocols.push_back(parse_protocol(p));
  }
  spec.timing = spec.timing || o.timing;
  spec.ao.eval.threads = resolve_threads(o);
  build_scenario(with_axis(cfg, spec.axis, spec.values.empty() ? 0.0 : spec.values.front()));
  if (o.out.empty()) throw ConfigError("--out is required");

  int failed = 0;
  const ResultTable table = run_sweep(cfg, spec, [&](const ResultRow& r) {
    if (!r.error.empty()) {
      ++failed;
      std::cerr << "cell " << r.axis << "=" << r.value << " " << r.strategy << "/" << r.protocol
                << " failed: " << r.error << '\n';
      return;
    }
    std::cerr << "cell " << r.axis << "=" << r.value << " " << r.strategy << "/" << r.protocol
              << " nmse=" << r.nmse << " stderr=" << r.stderr;
    if (o.verbose)
      std::cerr << " G=" << r.state.scenario.budget.G << " order=" << r.state.order.to_string()
                << " outer=" << r.state.outer_iterations << " evaluations=" << r.state.evaluations;
    std::cerr << '\n';
  });
  table.write(o.out);
  if (o.verbose) std::cerr << "wrote " << table.rows.size() << " rows to " << o.out << '\n';
  return failed > 0 && failed == static_cast<int>(table.rows.size()) ? 2 : 0;
}

int run_bench(const Options& o) {
  const Config cfg = load_config(o);
  if (o.out.empty()) throw ConfigError("--out is required");
  const AoSettings ao = optimizer_from_config(cfg);
  std::vector<std::string> strategies = o.strategies;
  if (strategies.empty()) strategies = {"rxpower-uatf", "rxpower", "greedy", "combined"};
  const int trials = o.trials ? *o.trials : ao.inner_trials;
  const auto rows = benchmark_ordering(cfg, strategies, o.sizes, o.repetitions, trials,
                                       resolve_seed(o, cfg), resolve_threads(o));
  for (const auto& r : rows)
    std::cerr << r.strategy << " M=" << r.M << " seconds=" << r.seconds_mean
              << " evaluations=" << r.evaluations << '\n';
  write_text(o.out, bench_csv(rows));
  return 0;
}

int run_ingest(const Options& o) {
  const Config cfg = load_config(o);
  if (o.out.empty()) throw ConfigError("--out is required");
  std::string log = o.log.empty() ? cfg.get_string("statistics", "log", "") : o.log;
  if (log.empty()) throw ConfigError("no measurement log (use --log or statistics.log)");
  if (o.log.empty() && std::filesystem::path(log).is_relative() && !o.config.empty())
    log = (std::filesystem::path(o.config).parent_path() / log).string();
  std::vector<int> motes = o.motes;
  if (motes.empty())
    for (double m : cfg.get_doubles("statistics", "motes")) motes.push_back(static_cast<int>(m));
  if (motes.empty()) throw ConfigError("no sensor ids (use --motes or statistics.motes)");
  const auto fraction = cfg.get_doubles("statistics", "noise_fraction");
  const MeasurementSeries series = load_measurement_log(log, motes);
  const ParameterStatistics stats = estimate_parameter_statistics(series, fraction);
  write_text(o.out, statistics_section(stats));
  std::cerr << "estimated statistics for " << motes.size() << " sensors from " << series.epochs.size()
            << " aligned epochs\n";
  return 0;
}

int run_validate(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  const Config cfg = Config::load(o.config);
  const Scenario scn = build_scenario(cfg);
  experiment_from_config(cfg);
  const auto unused = cfg.unused_keys();
  for (const auto& key : unused) std::cerr << "warning: unused key " << key << '\n';
  std::cerr << "ok: M=" << scn.M() << " K=" << scn.K() << " L=" << scn.L() << " G=" << scn.budget.G
            << " T=" << scn.budget.T << " n_p=" << scn.budget.n_p << " n_s=" << scn.budget.n_s << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"RIS-aided machine-type communication simulator"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "configuration file");
    sub->add_option("--out", o.out, "output file");
    sub->add_option("--seed", o.seed, "root seed (default 42, or RIS_SIM_SEED)");
    sub->add_option("--trials", o.trials, "Monte Carlo trials");
    sub->add_option("--threads", o.threads, "worker threads (default: all cores)")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", o.verbose, "more progress output");
  };
  auto experiment = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("--strategy", o.strategies, "ordering strategies")->delimiter(',');
    sub->add_option("--protocol", o.protocols, "training protocols (binary, nonbinary)")->delimiter(',');
    sub->add_flag("--timing", o.timing, "record wall-clock seconds in the CSV");
  };

  auto* sweep = app.add_subcommand("sweep", "sweep one axis and write a result table");
  experiment(sweep);
  sweep->add_option("--axis", o.axis, "NAME=v1,v2,... with NAME in L, M, K, n_c");
  auto* single = app.add_subcommand("single", "optimize and evaluate one configuration");
  experiment(single);
  auto* bench = app.add_subcommand("bench", "time the decoding-order optimizations");
  common(bench);
  bench->add_option("--strategy", o.strategies, "rxpower-uatf, rxpower, greedy, combined")->delimiter(',');
  bench->add_option("--sizes", o.sizes, "sensor counts")->delimiter(',');
  bench->add_option("--repetitions", o.repetitions, "repetitions per point")->check(CLI::PositiveNumber);
  auto* ingest = app.add_subcommand("ingest-stats", "estimate parameter statistics from a measurement log");
  common(ingest);
  ingest->add_option("--log", o.log, "measurement log");
  ingest->add_option("--motes", o.motes, "sensor ids")->delimiter(',');
  auto* validate = app.add_subcommand("validate-config", "check a configuration file");
  common(validate);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*sweep) return run_experiment(o, true);
    if (*single) return run_experiment(o, false);
    if (*bench) return run_bench(o);
    if (*ingest) return run_ingest(o);
    if (*validate) return run_validate(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace rismtc::cli
