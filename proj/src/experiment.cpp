// SPDX-License-Identifier: Apache-2.0
#include "rismtc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rismtc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string format_axis_value(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  return format_double(v);
}

}  // namespace

StrategySpec parse_strategy_spec(const std::string& text) {
  StrategySpec spec;
  spec.label = text;
  std::string base = text;
  for (bool changed = true; changed;) {
    changed = false;
    if (ends_with(base, "-uatf")) {
      spec.model = SinrModel::Uatf;
      base.resize(base.size() - 5);
      changed = true;
    }
    if (ends_with(base, "-nosic")) {
      spec.sic = false;
      base.resize(base.size() - 6);
      changed = true;
    }
  }
  spec.strategy = parse_strategy(base);
  return spec;
}

AoSettings optimizer_from_config(const Config& cfg) {
  AoSettings s;
  const std::string sec = "optimizer";
  s.tolerance = cfg.get_double(sec, "tolerance", s.tolerance);
  s.max_outer = static_cast<int>(cfg.get_int(sec, "max_outer", s.max_outer));
  s.inner_trials = static_cast<int>(cfg.get_int(sec, "inner_trials", s.inner_trials));
  s.phase.grid_points = static_cast<int>(cfg.get_int(sec, "grid_points", s.phase.grid_points));
  s.phase.phase_tolerance = cfg.get_double(sec, "phase_tolerance", s.phase.phase_tolerance);
  s.phase.max_cycles = static_cast<int>(cfg.get_int(sec, "max_cycles", s.phase.max_cycles));
  s.phase.tolerance = cfg.get_double(sec, "cycle_tolerance", s.phase.tolerance);
  s.optimize_order = cfg.get_bool(sec, "optimize_order", true);
  s.optimize_psi = cfg.get_bool(sec, "optimize_psi", true);
  s.optimize_upsilon = cfg.get_bool(sec, "optimize_upsilon", true);
  s.optimize_group = cfg.get_bool(sec, "optimize_group", true);
  const std::string sinr = cfg.get_string(sec, "sinr", "effective");
  if (sinr == "effective") s.eval.model = SinrModel::Effective;
  else if (sinr == "uatf") s.eval.model = SinrModel::Uatf;
  else throw ConfigError("optimizer.sinr must be effective or uatf");
  const std::string mode = cfg.get_string(sec, "uatf_mode", "bound");
  if (mode == "bound") s.eval.uatf_mode = UatfMode::Bound;
  else if (mode == "exact") s.eval.uatf_mode = UatfMode::Exact;
  else throw ConfigError("optimizer.uatf_mode must be bound or exact");
  s.eval.allowed_failures = static_cast<int>(cfg.get_int(sec, "allowed_failures", 1));
  s.eval.perfect_csi = cfg.get_bool(sec, "perfect_csi", false);
  if (s.max_outer < 0) throw ConfigError("optimizer.max_outer must be nonnegative");
  if (s.inner_trials < 1) throw ConfigError("optimizer.inner_trials must be at least 1");
  if (s.phase.grid_points < 3) throw ConfigError("optimizer.grid_points must be at least 3");
  if (!(s.phase.phase_tolerance > 0.0)) throw ConfigError("optimizer.phase_tolerance must be positive");
  return s;
}

ExperimentSpec experiment_from_config(const Config& cfg) {
  ExperimentSpec spec;
  const std::string sec = "experiment";
  spec.ao = optimizer_from_config(cfg);
  spec.axis = cfg.get_string(sec, "axis", "");
  spec.values = cfg.get_doubles(sec, "values");
  for (const auto& s : cfg.get_strings(sec, "strategies")) spec.strategies.push_back(parse_strategy_spec(s));
  if (spec.strategies.empty()) spec.strategies.push_back(parse_strategy_spec("combined"));
  for (const auto& p : cfg.get_strings(sec, "protocols")) spec.protocols.push_back(parse_protocol(p));
  if (spec.protocols.empty()) spec.protocols.push_back(Protocol::Binary);
  spec.report_trials = static_cast<int>(cfg.get_int(sec, "trials", spec.report_trials));
  spec.seed = static_cast<std::uint64_t>(cfg.get_int(sec, "seed", 42));
  spec.timing = cfg.get_bool(sec, "timing", false);
  if (spec.report_trials < 1) throw ConfigError("experiment.trials must be at least 1");
  if (!spec.axis.empty() && spec.axis != "L" && spec.axis != "M" && spec.axis != "K" && spec.axis != "n_c")
    throw ConfigError("experiment.axis must be one of L, M, K, n_c");
  return spec;
}

Config with_axis(const Config& cfg, const std::string& axis, double value) {
  Config out = cfg;
  if (axis.empty()) return out;
  if (value != std::floor(value) || value < 1) throw ConfigError("axis " + axis + " needs positive integers");
  const std::string v = std::to_string(static_cast<long long>(value));
  if (axis == "L") out.set("radio", "ris_elements", v);
  else if (axis == "K") out.set("radio", "antennas", v);
  else if (axis == "n_c") out.set("budget", "coherence_symbols", v);
  else if (axis == "M") out.set("geometry", "count", v);
  else throw ConfigError("unknown axis '" + axis + "'");
  return out;
}

ResultRow run_cell(const Config& cfg, const std::string& axis, double value,
                   const StrategySpec& strategy, Protocol protocol, const ExperimentSpec& spec) {
  ResultRow row;
  row.axis = axis.empty() ? "none" : axis;
  row.value = value;
  row.strategy = strategy.label;
  row.protocol = protocol_name(protocol);
  row.seed = spec.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Scenario scn = build_scenario(with_axis(cfg, axis, value));
    AoSettings ao = spec.ao;
    ao.seed = derive_seed(spec.seed, 0);
    ao.eval.model = strategy.model;
    ao.eval.sic = strategy.sic;
    row.state = alternating_optimize(scn, strategy.strategy, protocol, ao);
    const Evaluator report(row.state.scenario, row.state.protocol, spec.report_trials,
                           derive_seed(spec.seed, 1), ao.eval);
    const MseEstimate est = report.mse(row.state.psi, row.state.order);
    const double tr = scn.stats.C_theta.trace();
    row.nmse = nmse(est.mean, scn.stats.C_theta);
    row.stderr = est.stderr / tr;
  } catch (const std::exception& e) {
    row.nmse = std::numeric_limits<double>::quiet_NaN();
    row.stderr = std::numeric_limits<double>::quiet_NaN();
    row.error = e.what();
  }
  row.seconds = spec.timing ? seconds_since(start) : 0.0;
  return row;
}

ResultTable run_sweep(const Config& cfg, const ExperimentSpec& spec,
                      const std::function<void(const ResultRow&)>& progress) {
  ResultTable table;
  std::vector<double> values = spec.values;
  if (spec.axis.empty()) values = {0.0};
  for (double value : values)
    for (const auto& strategy : spec.strategies)
      for (Protocol protocol : spec.protocols) {
        table.rows.push_back(run_cell(cfg, spec.axis, value, strategy, protocol, spec));
        if (progress) progress(table.rows.back());
      }
  return table;
}

std::string ResultTable::to_csv() const {
  std::ostringstream out;
  out << "axis,value,strategy,protocol,nmse,stderr,seconds,seed\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << (r.axis == "none" ? std::string("0") : format_axis_value(r.value)) << ','
        << r.strategy << ',' << r.protocol << ',' << format_double(r.nmse) << ','
        << format_double(r.stderr) << ',' << format_double(r.seconds) << ',' << r.seed << '\n';
  }
  return out.str();
}

void ResultTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_csv();
}

std::vector<BenchRow> benchmark_ordering(const Config& cfg, const std::vector<std::string>& strategies,
                                         const std::vector<int>& sensor_counts, int repetitions,
                                         int trials, std::uint64_t seed, int threads) {
  std::vector<BenchRow> rows;
  for (int M : sensor_counts) {
    const Scenario scn = build_scenario(with_axis(cfg, "M", M));
    const TrainingProtocol protocol = build_training_matrix(Protocol::Binary, scn.L(), scn.budget.G);
    const CVec psi = CVec::Ones(scn.L());
    for (const auto& name : strategies) {
      const StrategySpec spec = parse_strategy_spec(name);
      if (spec.strategy == Strategy::Random || spec.strategy == Strategy::Measurement)
        throw ConfigError("bench covers rxpower, greedy and combined orderings");
      BenchRow row;
      row.strategy = name;
      row.M = M;
      double total = 0.0;
      for (int rep = 0; rep < repetitions; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        EvalOptions opts;
        opts.model = spec.model;
        opts.threads = threads;
        const Evaluator eval(scn, protocol, trials, derive_seed(seed, rep), opts);
        const auto terms = eval.link_terms(psi);
        DecodingOrder order;
        switch (spec.strategy) {
          case Strategy::RxPower:
            order = order_rx_power(eval.received_power(terms));
            break;
          case Strategy::Greedy:
            order = order_greedy(M, [&](const std::vector<int>& p) { return eval.truncated_mse(terms, p).mean; });
            break;
          default:
            order = order_combined(order_random(M, derive_seed(seed, 0x6f72646572ULL)),
                                   [&](const DecodingOrder& o) { return eval.mse(terms, o).mean; });
            break;
        }
        total += seconds_since(start);
        row.evaluations = eval.evaluations();
      }
      row.seconds_mean = repetitions > 0 ? total / repetitions : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "strategy,M,seconds_mean,evaluations\n";
  for (const auto& r : rows)
    out << r.strategy << ',' << r.M << ',' << format_double(r.seconds_mean) << ',' << r.evaluations << '\n';
  return out.str();
}

}  // namespace rismtc
