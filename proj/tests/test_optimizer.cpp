// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rismtc/optimizer.hpp"

using namespace rismtc;

namespace {

ParameterStatistics diag_stats(const RVec& var, const RVec& noise) {
  ParameterStatistics st;
  st.mean = RVec::Zero(var.size());
  st.C_theta = var.asDiagonal();
  st.C_eta = noise.asDiagonal();
  return st;
}

// Random link terms and statistics for small ordering problems.
struct Toy {
  std::vector<LinkTerms> terms;
  ParameterStatistics stats;
  int n_s = 40;
  double rate = 0.5;

  Toy(int M, std::uint64_t seed, int trials = 40) {
    Rng rng(seed);
    RVec var(M), noise(M);
    for (int i = 0; i < M; ++i) {
      var(i) = 0.5 + 2.0 * rng.uniform();
      noise(i) = var(i) * (0.02 + 0.5 * rng.uniform());
    }
    stats = diag_stats(var, noise);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < i; ++j) stats.C_theta(i, j) = stats.C_theta(j, i) = 0.3 * std::sqrt(var(i) * var(j));
    RVec gain(M);
    for (int i = 0; i < M; ++i) gain(i) = std::pow(10.0, 1.5 * rng.uniform());
    for (int t = 0; t < trials; ++t) {
      std::vector<CVec> h;
      for (int i = 0; i < M; ++i) h.push_back(std::sqrt(gain(i)) * rng.complex_normal_vector(2));
      std::vector<CMat> R(M, 0.05 * CMat::Identity(2, 2));
      terms.push_back(effective_link_terms(h, h, R, RVec::Ones(M), 1.0));
    }
  }

  double truncated(const std::vector<int>& prefix) const {
    const RVec eps = prefix_mse(stats, prefix);
    double acc = 0.0;
    for (const auto& t : terms) {
      const RVec rho = sinr_along(t, prefix);
      RVec per(rho.size());
      for (Eigen::Index s = 0; s < rho.size(); ++s) per(s) = fbl_per(rho(s), n_s, rate);
      acc += conditional_total_mse(outcome_probabilities(per), eps);
    }
    return acc / terms.size();
  }
  double full(const DecodingOrder& o) const { return truncated(o.sequence()); }
};

Scenario small(int M = 3, int L = 4) {
  return build_scenario(Config::parse(
      "[geometry]\ncount = " + std::to_string(M) + "\n[radio]\nantennas = 2\nris_elements = " +
      std::to_string(L) + "\n[budget]\ncoherence_symbols = 60\n"));
}

}  // namespace

TEST_CASE("received-power ordering") {
  CHECK(order_rx_power((RVec(3) << 3, 1, 2).finished()).to_string() == "[1,3,2]");
  CHECK(order_rx_power(RVec::Constant(4, 2.0)) == DecodingOrder::identity(4));
  CHECK(order_rx_power(RVec::Constant(1, 5.0)) == DecodingOrder::identity(1));
}

TEST_CASE("measurement ordering") {
  CHECK(order_measurement(diag_stats((RVec(2) << 1, 4).finished(), RVec::Ones(2))).sequence() ==
        std::vector<int>{1, 0});
  CHECK(order_measurement(diag_stats(RVec::Constant(3, 2.0), RVec::Constant(3, 0.2))) ==
        DecodingOrder::identity(3));
  CHECK(order_measurement(diag_stats((RVec(3) << 1, 1, 9).finished(), (RVec(3) << 0.1, 0, 0.1).finished()))
            .sequence() == std::vector<int>{1, 2, 0});
}

TEST_CASE("random ordering is a seeded permutation") {
  for (int M = 1; M <= 12; ++M) {
    const DecodingOrder a = order_random(M, 5);
    CHECK(is_permutation(a.steps()));
    CHECK(a == order_random(M, 5));
  }
  CHECK_FALSE(order_random(12, 1) == order_random(12, 2));
}

TEST_CASE("greedy ordering") {
  CHECK(order_greedy(1, [](const std::vector<int>&) { return 1.0; }) == DecodingOrder::identity(1));
  // sensor 2 has the stronger link and the better measurement
  Toy toy(2, 1);
  toy.stats = diag_stats((RVec(2) << 1.0, 3.0).finished(), (RVec(2) << 0.5, 0.1).finished());
  for (auto& t : toy.terms) t.signal(1) = 50.0 * t.signal(0) + 1.0;
  const DecodingOrder g = order_greedy(2, [&](const std::vector<int>& p) { return toy.truncated(p); });
  CHECK(g.sequence().front() == 1);
  // ties resolve to the lowest index
  CHECK(order_greedy(4, [](const std::vector<int>&) { return 0.0; }) == DecodingOrder::identity(4));

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Toy t3(3, seed);
    const DecodingOrder o = order_greedy(3, [&](const std::vector<int>& p) { return t3.truncated(p); });
    std::vector<int> seq{0, 1, 2};
    std::vector<double> all;
    do all.push_back(t3.full(DecodingOrder::from_sequence(seq)));
    while (std::next_permutation(seq.begin(), seq.end()));
    const double v = t3.full(o);
    CHECK(std::any_of(all.begin(), all.end(), [&](double x) { return x == v; }));
  }
}

TEST_CASE("combined ordering reproduces the worked example") {
  // epsilon(o) = 10 o_2 + o_3 with 1-based steps
  std::vector<std::string> visited;
  const OrderOracle oracle = [&](const DecodingOrder& o) {
    visited.push_back(o.to_string());
    return 10.0 * (o.step(1) + 1) + (o.step(2) + 1);
  };
  const DecodingOrder out = order_combined(DecodingOrder::from_steps({1, 2, 0}), oracle);
  CHECK(out.to_string() == "[3,1,2]");
  CHECK(std::find(visited.begin(), visited.end(), "[3,1,2]") != visited.end());

  const DecodingOrder init = DecodingOrder::from_steps({2, 0, 3, 1});
  CHECK(order_combined(init, [](const DecodingOrder&) { return 1.0; }) == init);
}

TEST_CASE("combined ordering never loses to its start and usually beats random") {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Toy toy(3, 1000 + seed, 20);
    const DecodingOrder start = order_random(3, seed);
    const DecodingOrder out = order_combined(start, [&](const DecodingOrder& o) { return toy.full(o); });
    CHECK(toy.full(out) <= toy.full(start));
    if (toy.full(out) <= toy.full(order_random(3, seed + 7777))) ++wins;
  }
  CHECK(wins >= 90);
}

TEST_CASE("phase search recovers a cosine minimum") {
  for (double target : {0.3, 2.0, 4.4, 6.1}) {
    const auto f = [&](const CVec& x) { return 2.0 - 1.5 * std::cos(std::arg(x(0)) - target); };
    const CVec start = CVec::Ones(1);
    const PhaseResult r = optimize_phases(start, f(start), f, PhaseSearch{});
    double err = std::remainder(std::arg(r.values(0)) - target, 2 * std::numbers::pi);
    CHECK(std::abs(err) < 1e-3);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
    CHECK(r.objective <= f(start));
  }
}

TEST_CASE("phase search keeps unit modulus and monotone history") {
  Rng rng(2);
  const CVec a = rng.complex_normal_vector(6);
  const auto f = [&](const CVec& x) { return -std::norm(a.dot(x)) + 0.1 * std::norm(x.sum()); };
  CVec start = CVec::Ones(6);
  const PhaseResult r = optimize_phases(start, f(start), f, PhaseSearch{});
  for (Eigen::Index l = 0; l < 6; ++l) CHECK(std::abs(r.values(l)) == doctest::Approx(1.0).epsilon(1e-14));
  double prev = f(start);
  for (double h : r.history) {
    CHECK(h <= prev);
    prev = h;
  }
  CHECK(r.objective == doctest::Approx(f(r.values)).epsilon(1e-14));
}

TEST_CASE("group size search") {
  const Scenario scn = build_scenario(Config::parse(
      "[geometry]\ncount = 2\n[radio]\nris_elements = 6\nantennas = 2\n[budget]\ncoherence_symbols = 20\n"));
  const auto cands = group_candidates(scn);
  CHECK(cands == std::vector<int>{1, 2, 3, 6});
  for (int G : cands) CHECK(scn.with_group_size(G).budget.n_p == 2 * 6 / G);
  // favoring a long data phase selects G = L
  const int best = select_group_size(
      cands, [&](int G) { return 1.0 / scn.with_group_size(G).budget.n_s; }, 1,
      1.0 / scn.with_group_size(1).budget.n_s);
  CHECK(best == 6);
  CHECK(select_group_size(cands, [](int) { return 1.0; }, 2, 1.0) == 6);
  CHECK_THROWS_AS(build_scenario(Config::parse(
                      "[geometry]\ncount = 4\n[radio]\nris_elements = 6\n[budget]\ncoherence_symbols = 4\n")),
                  ConfigError);
  CHECK_THROWS_AS(select_group_size({}, [](int) { return 0.0; }, 1, 0.0), ConfigError);
}

TEST_CASE("alternating optimization") {
  const Scenario scn = small();
  AoSettings s;
  s.inner_trials = 30;
  s.max_outer = 3;
  s.phase.max_cycles = 1;
  s.seed = 7;
  for (Strategy st : {Strategy::Random, Strategy::RxPower, Strategy::Measurement, Strategy::Greedy,
                      Strategy::Combined}) {
    const AoState out = alternating_optimize(scn, st, Protocol::Binary, s);
    CHECK(is_permutation(out.order.steps()));
    REQUIRE(out.history.size() >= 2);
    for (std::size_t k = 1; k < out.history.size(); ++k) CHECK(out.history[k] <= out.history[k - 1]);
    for (Eigen::Index l = 0; l < out.psi.size(); ++l) CHECK(std::abs(out.psi(l)) == doctest::Approx(1.0));
    if (st == Strategy::Measurement) CHECK(out.order == order_measurement(scn.stats));
  }
}

TEST_CASE("alternating optimization with every step disabled is the identity") {
  const Scenario scn = small();
  AoSettings s;
  s.inner_trials = 20;
  s.max_outer = 1;
  s.optimize_order = s.optimize_psi = s.optimize_upsilon = s.optimize_group = false;
  const AoState out = alternating_optimize(scn, Strategy::Measurement, Protocol::NonBinary, s);
  CHECK(out.psi == CVec::Ones(scn.L()));
  CHECK(out.scenario.budget.G == scn.budget.G);
  CHECK(out.protocol.upsilon == build_training_matrix(Protocol::NonBinary, scn.L(), scn.budget.G).upsilon);
  CHECK(out.history.size() == 2);
  CHECK(out.history[0] == out.history[1]);
}

TEST_CASE("non-binary training stays unit modulus") {
  const Scenario scn = small(2, 4);
  AoSettings s;
  s.inner_trials = 20;
  s.max_outer = 1;
  s.phase.max_cycles = 1;
  s.phase.grid_points = 6;
  s.optimize_group = false;
  const AoState out = alternating_optimize(scn, Strategy::RxPower, Protocol::NonBinary, s);
  for (Eigen::Index k = 0; k < out.protocol.upsilon.size(); ++k)
    CHECK(std::abs(out.protocol.upsilon(k)) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t k = 1; k < out.history.size(); ++k) CHECK(out.history[k] <= out.history[k - 1]);
}
