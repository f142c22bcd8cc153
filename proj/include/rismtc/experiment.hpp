// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rismtc/config.hpp"
#include "rismtc/optimizer.hpp"

namespace rismtc {

// A strategy column entry: base strategy plus optional "-uatf" (UatF SINR
// instead of the effective SINR) and "-nosic" (no cancellation) suffixes.
struct StrategySpec {
  std::string label;
  Strategy strategy = Strategy::Combined;
  SinrModel model = SinrModel::Effective;
  bool sic = true;
};

StrategySpec parse_strategy_spec(const std::string& text);

struct ExperimentSpec {
  std::string axis;             // L, M, K or n_c; empty for a single cell
  std::vector<double> values;
  std::vector<StrategySpec> strategies;
  std::vector<Protocol> protocols;
  int report_trials = 1000;
  std::uint64_t seed = 42;
  AoSettings ao;
  bool timing = false;          // record wall-clock seconds (otherwise 0)
};

// [experiment] and [optimizer] sections; flags override afterwards.
ExperimentSpec experiment_from_config(const Config& cfg);
AoSettings optimizer_from_config(const Config& cfg);

// Applies one axis value to a copy of the configuration.
Config with_axis(const Config& cfg, const std::string& axis, double value);

struct ResultRow {
  std::string axis;
  double value = 0.0;
  std::string strategy;
  std::string protocol;
  double nmse = 0.0;
  double stderr = 0.0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // nonempty for a failed cell (nmse is NaN)
  AoState state;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::string to_csv() const;
  void write(const std::filesystem::path& path) const;
};

// Every cell shares the same seed so cells are compared on common random
// numbers; the optimization and reporting banks use separate substreams.
ResultRow run_cell(const Config& cfg, const std::string& axis, double value,
                   const StrategySpec& strategy, Protocol protocol, const ExperimentSpec& spec);

ResultTable run_sweep(const Config& cfg, const ExperimentSpec& spec,
                      const std::function<void(const ResultRow&)>& progress = {});

struct BenchRow {
  std::string strategy;
  int M = 0;
  double seconds_mean = 0.0;
  long evaluations = 0;
};

// Wall-clock time of one decoding-order optimization (bank construction and
// SINR terms included) for strategies rxpower-uatf, rxpower, greedy, combined.
std::vector<BenchRow> benchmark_ordering(const Config& cfg, const std::vector<std::string>& strategies,
                                         const std::vector<int>& sensor_counts, int repetitions,
                                         int trials, std::uint64_t seed, int threads);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace rismtc
