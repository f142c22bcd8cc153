// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rismtc/csi.hpp"
#include "rismtc/decoding.hpp"
#include "rismtc/evaluator.hpp"
#include "rismtc/scenario.hpp"

namespace rismtc {

enum class Strategy { Random, RxPower, Measurement, Greedy, Combined };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);

// Descending metric, ties by ascending sensor index.
DecodingOrder order_rx_power(const RVec& received_power);
// Descending C_theta[i,i] / C_eta[i,i]; zero noise ranks first.
DecodingOrder order_measurement(const ParameterStatistics& stats);
DecodingOrder order_random(int M, std::uint64_t seed);

using PrefixOracle = std::function<double(const std::vector<int>& prefix)>;
using OrderOracle = std::function<double(const DecodingOrder& order)>;

// Sequential construction minimizing the truncated MSE of each prefix.
DecodingOrder order_greedy(int M, const PrefixOracle& oracle);
// Stage-by-stage swaps minimizing the full MSE. The sensor already at the
// stage keeps it on ties, then the lowest index wins.
DecodingOrder order_combined(const DecodingOrder& initial, const OrderOracle& oracle);

struct PhaseSearch {
  int grid_points = 16;
  double phase_tolerance = 1e-3;  // golden-section bracket width, rad
  int max_cycles = 3;
  double tolerance = 1e-3;        // relative improvement per cycle
};

struct PhaseResult {
  CVec values;
  double objective = 0.0;
  std::vector<double> history;  // objective after every accepted move
  int evaluations = 0;
};

// Cyclic coordinate descent over the phases of unit-modulus entries. Each
// scalar phase: coarse grid around the circle, then golden-section search in
// the bracket around the best grid point. Moves are kept only if they lower
// the objective.
PhaseResult optimize_phases(const CVec& start, double start_objective,
                            const std::function<double(const CVec&)>& objective,
                            const PhaseSearch& search);

// Same search; focus(x, l) returns the objective as a function of entry l
// with the rest of x held fixed, so callers can cache per-coordinate work.
using CoordinateFocus = std::function<std::function<double(cd)>(const CVec&, Eigen::Index)>;
PhaseResult optimize_phases(const CVec& start, double start_objective, const CoordinateFocus& focus,
                            const PhaseSearch& search);

struct AoSettings {
  double tolerance = 1e-3;
  int max_outer = 10;
  int inner_trials = 200;
  PhaseSearch phase;
  bool optimize_order = true;
  bool optimize_psi = true;
  bool optimize_upsilon = true;
  bool optimize_group = true;
  EvalOptions eval;
  std::uint64_t seed = 42;
};

struct AoState {
  Scenario scenario;  // budget reflects the current G
  TrainingProtocol protocol;
  CVec psi;
  DecodingOrder order;
  std::vector<double> history;  // objective after init and after each outer iteration
  long evaluations = 0;
  int outer_iterations = 0;
};

// Selects G by direct search over the feasible divisors of L, rebuilding the
// budget for each candidate. Ties go to the larger G.
std::vector<int> group_candidates(const Scenario& scn);
int select_group_size(const std::vector<int>& candidates, const std::function<double(int)>& objective,
                      int current, double current_objective);

AoState alternating_optimize(const Scenario& scn, Strategy strategy, Protocol protocol,
                             const AoSettings& settings);

}  // namespace rismtc
