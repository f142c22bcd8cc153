// SPDX-License-Identifier: Apache-2.0
#include "rismtc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>

#include "rismtc/rng.hpp"

namespace rismtc {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::RxPower: return "rxpower";
    case Strategy::Measurement: return "measurement";
    case Strategy::Greedy: return "greedy";
    case Strategy::Combined: return "combined";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "random") return Strategy::Random;
  if (name == "rxpower" || name == "rx-power") return Strategy::RxPower;
  if (name == "measurement") return Strategy::Measurement;
  if (name == "greedy") return Strategy::Greedy;
  if (name == "combined") return Strategy::Combined;
  throw ConfigError("unknown strategy '" + name + "' (random, rxpower, measurement, greedy, combined)");
}

namespace {

DecodingOrder descending(const RVec& metric) {
  std::vector<int> seq(metric.size());
  std::iota(seq.begin(), seq.end(), 0);
  std::stable_sort(seq.begin(), seq.end(), [&](int a, int b) { return metric(a) > metric(b); });
  return DecodingOrder::from_sequence(seq);
}

}  // namespace

DecodingOrder order_rx_power(const RVec& received_power) { return descending(received_power); }

DecodingOrder order_measurement(const ParameterStatistics& stats) {
  RVec xi(stats.size());
  for (int i = 0; i < stats.size(); ++i) {
    const double noise = stats.C_eta(i, i);
    xi(i) = noise > 0.0 ? stats.C_theta(i, i) / noise : std::numeric_limits<double>::infinity();
  }
  return descending(xi);
}

DecodingOrder order_random(int M, std::uint64_t seed) {
  std::vector<int> seq(M);
  std::iota(seq.begin(), seq.end(), 0);
  Rng rng(seed);
  // Fisher-Yates with our own uniform draws so the result is portable.
  for (int i = M - 1; i > 0; --i) {
    const int j = std::min(i, static_cast<int>(rng.uniform() * (i + 1)));
    std::swap(seq[i], seq[j]);
  }
  return DecodingOrder::from_sequence(seq);
}

DecodingOrder order_greedy(int M, const PrefixOracle& oracle) {
  std::vector<int> prefix;
  std::vector<char> placed(M, 0);
  for (int s = 0; s < M; ++s) {
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    for (int j = 0; j < M; ++j) {
      if (placed[j]) continue;
      prefix.push_back(j);
      const double value = oracle(prefix);
      prefix.pop_back();
      if (best < 0 || value < best_value) {
        best = j;
        best_value = value;
      }
    }
    placed[best] = 1;
    prefix.push_back(best);
  }
  return DecodingOrder::from_sequence(prefix);
}

DecodingOrder order_combined(const DecodingOrder& initial, const OrderOracle& oracle) {
  DecodingOrder order = initial;
  const int M = order.size();
  for (int s = 0; s < M; ++s) {
    const auto seq = order.sequence();
    const int incumbent = seq[s];
    int best = incumbent;
    double best_value = oracle(order);
    std::vector<int> candidates(seq.begin() + s + 1, seq.end());
    std::sort(candidates.begin(), candidates.end());
    for (int j : candidates) {
      DecodingOrder trial = order;
      trial.swap_steps(s, order.step(j));
      const double value = oracle(trial);
      if (value < best_value) {
        best = j;
        best_value = value;
      }
    }
    if (best != incumbent) order.swap_steps(s, order.step(best));
  }
  return order;
}

PhaseResult optimize_phases(const CVec& start, double start_objective,
                            const std::function<double(const CVec&)>& objective,
                            const PhaseSearch& search) {
  CoordinateFocus focus = [&](const CVec& x, Eigen::Index l) {
    return std::function<double(cd)>([&objective, x, l](cd value) {
      CVec y = x;
      y(l) = value;
      return objective(y);
    });
  };
  return optimize_phases(start, start_objective, focus, search);
}

PhaseResult optimize_phases(const CVec& start, double start_objective, const CoordinateFocus& focus,
                            const PhaseSearch& search) {
  PhaseResult res;
  res.values = start;
  res.objective = start_objective;
  const double two_pi = 2.0 * std::numbers::pi;
  const int grid = std::max(3, search.grid_points);
  const double step = two_pi / grid;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  std::function<double(cd)> current;
  auto eval_at = [&](Eigen::Index, double phase) {
    ++res.evaluations;
    return current(std::polar(1.0, phase));
  };

  for (int cycle = 0; cycle < search.max_cycles; ++cycle) {
    const double cycle_start = res.objective;
    for (Eigen::Index l = 0; l < res.values.size(); ++l) {
      const double base = std::arg(res.values(l));
      current = focus(res.values, l);
      std::vector<double> values(grid);
      values[0] = res.objective;
      int best_k = 0;
      for (int k = 1; k < grid; ++k) {
        values[k] = eval_at(l, base + k * step);
        if (values[k] < values[best_k]) best_k = k;
      }
      double best_phase = base + best_k * step;
      double best_value = values[best_k];
      // Golden-section search on the bracket around the best grid point.
      double a = best_phase - step, b = best_phase + step;
      double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
      double fc = eval_at(l, c), fd = eval_at(l, d);
      while (b - a > search.phase_tolerance) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - inv_phi * (b - a);
          fc = eval_at(l, c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + inv_phi * (b - a);
          fd = eval_at(l, d);
        }
      }
      if (fc < best_value) {
        best_value = fc;
        best_phase = c;
      }
      if (fd < best_value) {
        best_value = fd;
        best_phase = d;
      }
      if (best_value < res.objective) {
        double wrapped = std::fmod(best_phase, two_pi);
        if (wrapped < 0.0) wrapped += two_pi;
        res.values(l) = std::polar(1.0, wrapped);
        res.objective = best_value;
        res.history.push_back(best_value);
      }
    }
    const double gain = cycle_start - res.objective;
    if (!(gain > search.tolerance * std::abs(cycle_start))) break;
  }
  return res;
}

std::vector<int> group_candidates(const Scenario& scn) {
  const auto out = feasible_group_sizes(scn.M(), scn.L(), scn.radio.n_c);
  if (out.empty()) throw ConfigError("coherence block too small for any group size");
  return out;
}

int select_group_size(const std::vector<int>& candidates, const std::function<double(int)>& objective,
                      int current, double current_objective) {
  if (candidates.empty()) throw ConfigError("coherence block too small for any group size");
  int best = current;
  double best_value = current_objective;
  for (int G : candidates) {
    const double value = G == current ? current_objective : objective(G);
    if (value < best_value || (value == best_value && G > best)) {
      best = G;
      best_value = value;
    }
  }
  return best;
}

namespace {

CVec flatten(const CMat& m) { return Eigen::Map<const CVec>(m.data(), m.size()); }

class AoRun {
 public:
  AoRun(const Scenario& scn, Strategy strategy, Protocol protocol, const AoSettings& settings)
      : strategy_(strategy), settings_(settings) {
    state_.scenario = scn;
    state_.protocol = build_training_matrix(protocol, scn.L(), scn.budget.G);
    state_.psi = CVec::Ones(scn.L());
    rebuild();
  }

  AoState run() {
    const int M = state_.scenario.M();
    terms_ = eval_->link_terms(state_.psi);
    switch (strategy_) {
      case Strategy::Random:
      case Strategy::Combined:
        state_.order = order_random(M, derive_seed(settings_.seed, 0x6f72646572ULL));
        break;
      case Strategy::Measurement:
        state_.order = order_measurement(state_.scenario.stats);
        break;
      case Strategy::RxPower:
        state_.order = order_rx_power(eval_->received_power(terms_));
        break;
      case Strategy::Greedy:
        state_.order = greedy();
        break;
    }
    double current = objective_terms(state_.order);
    state_.history.push_back(current);

    for (int outer = 0; outer < settings_.max_outer; ++outer) {
      const double start = current;
      if (settings_.optimize_order) current = update_order(current);
      if (settings_.optimize_psi) current = update_psi(current);
      if (settings_.optimize_upsilon && state_.protocol.kind == Protocol::NonBinary)
        current = update_upsilon(current);
      if (settings_.optimize_group) current = update_group(current);
      state_.history.push_back(current);
      state_.outer_iterations = outer + 1;
      if (!(start - current > settings_.tolerance * std::abs(start))) break;
    }
    state_.evaluations = retired_evaluations_ + eval_->evaluations();
    return state_;
  }

 private:
  void rebuild() {
    if (eval_) retired_evaluations_ += eval_->evaluations();
    eval_ = std::make_unique<Evaluator>(state_.scenario, state_.protocol, settings_.inner_trials,
                                        settings_.seed, settings_.eval);
  }

  double objective_terms(const DecodingOrder& order) const { return eval_->mse(terms_, order).mean; }

  DecodingOrder greedy() const {
    return order_greedy(state_.scenario.M(), [&](const std::vector<int>& prefix) {
      return eval_->truncated_mse(terms_, prefix).mean;
    });
  }

  double update_order(double current) {
    DecodingOrder candidate;
    switch (strategy_) {
      case Strategy::Random:
      case Strategy::Measurement:
        return current;  // fixed after initialization
      case Strategy::RxPower:
        candidate = order_rx_power(eval_->received_power(terms_));
        break;
      case Strategy::Greedy:
        candidate = greedy();
        break;
      case Strategy::Combined:
        candidate = order_combined(state_.order, [&](const DecodingOrder& o) { return objective_terms(o); });
        break;
    }
    const double value = objective_terms(candidate);
    if (value <= current) {
      state_.order = candidate;
      return value;
    }
    return current;
  }

  double update_psi(double current) {
    CoordinateFocus f = [&](const CVec& psi, Eigen::Index l) {
      return eval_->psi_coordinate(psi, l, state_.order);
    };
    const PhaseResult res = optimize_phases(state_.psi, current, f, settings_.phase);
    if (res.objective <= current) {
      state_.psi = res.values;
      current = res.objective;
    }
    terms_ = eval_->link_terms(state_.psi);
    return current;
  }

  double update_upsilon(double current) {
    const Eigen::Index L = state_.protocol.upsilon.rows();
    const Eigen::Index T = state_.protocol.upsilon.cols();
    auto f = [&](const CVec& flat) {
      return eval_->training_mse(Eigen::Map<const CMat>(flat.data(), L, T), state_.psi, state_.order).mean;
    };
    const PhaseResult res = optimize_phases(flatten(state_.protocol.upsilon), current, f, settings_.phase);
    if (res.objective <= current) {
      state_.protocol.upsilon = Eigen::Map<const CMat>(res.values.data(), L, T);
      current = res.objective;
    }
    eval_->set_training(state_.protocol.upsilon);
    terms_ = eval_->link_terms(state_.psi);
    return current;
  }

  double update_group(double current) {
    const Scenario base = state_.scenario;
    const int G0 = base.budget.G;
    auto candidate_protocol = [&](int G) {
      if (G == G0) return state_.protocol;
      return build_training_matrix(state_.protocol.kind, base.L(), G);
    };
    const int best = select_group_size(
        group_candidates(base),
        [&](int G) {
          const Scenario scn = base.with_group_size(G);
          Evaluator e(scn, candidate_protocol(G), settings_.inner_trials, settings_.seed, settings_.eval);
          const double value = e.mse(state_.psi, state_.order).mean;
          retired_evaluations_ += e.evaluations();
          return value;
        },
        G0, current);
    if (best == G0) return current;
    state_.protocol = candidate_protocol(best);
    state_.scenario = base.with_group_size(best);
    rebuild();
    terms_ = eval_->link_terms(state_.psi);
    return objective_terms(state_.order);
  }

  Strategy strategy_;
  AoSettings settings_;
  AoState state_;
  std::unique_ptr<Evaluator> eval_;
  std::vector<LinkTerms> terms_;
  long retired_evaluations_ = 0;
};

}  // namespace

AoState alternating_optimize(const Scenario& scn, Strategy strategy, Protocol protocol,
                             const AoSettings& settings) {
  return AoRun(scn, strategy, protocol, settings).run();
}

}  // namespace rismtc
