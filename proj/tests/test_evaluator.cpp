// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "rismtc/evaluator.hpp"
#include "rismtc/linalg.hpp"

using namespace rismtc;

namespace {

Scenario world(const std::string& extra = "", int M = 3) {
  return build_scenario(Config::parse("[geometry]\ncount = " + std::to_string(M) +
                                      "\n[radio]\nantennas = 2\nris_elements = 4\n" + extra));
}

CVec phases(int L) {
  CVec psi(L);
  for (int l = 0; l < L; ++l) psi(l) = std::polar(1.0, 1.3 * l);
  return psi;
}

}  // namespace

TEST_CASE("pairwise sum and summary") {
  std::vector<double> v(1000);
  for (int k = 0; k < 1000; ++k) v[k] = 0.001 * k;
  CHECK(pairwise_sum(v.data(), v.size()) == doctest::Approx(499.5).epsilon(1e-14));
  const MseEstimate e = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == 2.5);
  CHECK(e.stderr == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.trials == 4);
}

TEST_CASE("bank evaluation matches the streaming reference") {
  const Scenario scn = world();
  const TrainingProtocol p = build_training_matrix(Protocol::NonBinary, 4, scn.budget.G);
  const CVec psi = phases(4);
  const DecodingOrder o = DecodingOrder::from_sequence({2, 0, 1});
  const Evaluator ev(scn, p, 300, 99, EvalOptions{});
  const MseEstimate a = ev.mse(psi, o);
  const MseEstimate b = average_mse_streaming(scn, p, psi, o, 300, 99);
  CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-8));
  CHECK(a.stderr == doctest::Approx(b.stderr).epsilon(1e-6));

  EvalOptions nosic;
  nosic.sic = false;
  const Evaluator en(scn, p, 100, 5, nosic);
  CHECK(en.mse(psi, o).mean ==
        doctest::Approx(average_mse_streaming(scn, p, psi, o, 100, 5, false, 1).mean).epsilon(1e-8));
}

TEST_CASE("results do not depend on the thread count") {
  const Scenario scn = world();
  const TrainingProtocol p = build_training_matrix(Protocol::Binary, 4, scn.budget.G);
  EvalOptions one, many;
  many.threads = 3;
  const Evaluator a(scn, p, 101, 4, one);
  const Evaluator b(scn, p, 101, 4, many);
  const MseEstimate ea = a.mse(phases(4), DecodingOrder::identity(3));
  const MseEstimate eb = b.mse(phases(4), DecodingOrder::identity(3));
  CHECK(ea.mean == eb.mean);
  CHECK(ea.stderr == eb.stderr);
}

TEST_CASE("error-free and silent limits") {
  const Scenario good = world("noise_psd_dbm_hz = -250\n[budget]\ncoherence_symbols = 2000\n", 1);
  const TrainingProtocol p = build_training_matrix(Protocol::Binary, 4, good.budget.G);
  EvalOptions perfect;
  perfect.perfect_csi = true;
  const Evaluator ev(good, p, 50, 1, perfect);
  const double all = prefix_mse(good.stats, {0})(1);
  const MseEstimate e = ev.mse(phases(4), DecodingOrder::identity(1));
  CHECK(e.mean == doctest::Approx(all).epsilon(1e-6));

  const Scenario silent = world("tx_power_dbm = -300\n");
  const Evaluator es(silent, p, 50, 1, EvalOptions{});
  CHECK(es.mse(phases(4), DecodingOrder::identity(3)).mean ==
        doctest::Approx(silent.stats.C_theta.trace()).epsilon(1e-9));
}

TEST_CASE("no SIC with one sensor is the SIC path") {
  const Scenario scn = world("", 1);
  const TrainingProtocol p = build_training_matrix(Protocol::Binary, 4, scn.budget.G);
  EvalOptions nosic;
  nosic.sic = false;
  const Evaluator a(scn, p, 80, 3, EvalOptions{});
  const Evaluator b(scn, p, 80, 3, nosic);
  CHECK(a.mse(phases(4), DecodingOrder::identity(1)).mean ==
        doctest::Approx(b.mse(phases(4), DecodingOrder::identity(1)).mean).epsilon(1e-14));
}

TEST_CASE("UatF evaluation is deterministic") {
  const Scenario scn = world();
  const TrainingProtocol p = build_training_matrix(Protocol::Binary, 4, scn.budget.G);
  EvalOptions u;
  u.model = SinrModel::Uatf;
  const Evaluator ev(scn, p, 500, 1, u);
  const auto terms = ev.link_terms(phases(4));
  CHECK(terms.size() == 1);
  const MseEstimate e = ev.mse(terms, DecodingOrder::identity(3));
  CHECK(e.stderr == 0.0);
  CHECK(e.mean > 0.0);
  CHECK(e.mean <= scn.stats.C_theta.trace());
  const Evaluator other(scn, p, 10, 77, u);
  CHECK(other.mse(phases(4), DecodingOrder::identity(3)).mean == e.mean);
}

TEST_CASE("coordinate objective matches a full evaluation") {
  const Scenario scn = world();
  const TrainingProtocol p = build_training_matrix(Protocol::NonBinary, 4, scn.budget.G);
  const Evaluator ev(scn, p, 60, 8, EvalOptions{});
  const CVec psi = phases(4);
  const DecodingOrder o = DecodingOrder::from_sequence({1, 2, 0});
  const auto f = ev.psi_coordinate(psi, 2, o);
  for (double phi : {0.0, 1.0, 4.0}) {
    CVec x = psi;
    x(2) = std::polar(1.0, phi);
    CHECK(f(x(2)) == doctest::Approx(ev.mse(x, o).mean).epsilon(1e-12));
  }
}

TEST_CASE("UatF inputs agree with the dense moments") {
  // projected prior moments and the dense cross-covariance route
  const Scenario scn = world("direct_link = false\n");
  const TrainingProtocol p = build_training_matrix(Protocol::Binary, 4, scn.budget.G);
  EvalOptions opts;
  opts.model = SinrModel::Uatf;
  const Evaluator ev(scn, p, 0, 1, opts);
  const CVec psi = phases(4);
  const UatfInputs in = ev.uatf_inputs(psi);
  const CascadedPrior prior = cascaded_prior_moments(scn, array_responses(scn));
  const CMat P = kron(CMat(psi.transpose()), CMat::Identity(2, 2));
  for (int i = 0; i < 3; ++i) {
    CHECK((in.mean[i] - P * prior.mean[i]).norm() <= 1e-12 * (P * prior.mean[i]).norm());
    const CMat C = P * prior.covariance(i) * P.adjoint();
    CHECK((in.cov[i] - C).norm() <= 1e-12 * C.norm());
  }
  // Cov(h_j, h_hat_i) = P_j Cov(g_j, g_i) A_i^H S^H P_i^H
  const RVec noise = training_noise_variance(scn);
  const CMat S = training_operator(p.upsilon, 2);
  const CsiEstimate f0 = lmmse_filter(prior.mean[0], prior.covariance(0), S, noise(0));
  const CMat dense = P * prior.cross_covariance(1, 0) * S.adjoint() * f0.A.adjoint() * P.adjoint();
  CHECK((in.cross[0][1] - dense).norm() <= 1e-8 * dense.norm());
}

TEST_CASE("candidate training matrix leaves the evaluator unchanged") {
  const Scenario scn = world();
  const TrainingProtocol p = build_training_matrix(Protocol::NonBinary, 4, scn.budget.G);
  CMat other = p.upsilon;
  for (Eigen::Index k = 0; k < other.size(); ++k) other(k) *= std::polar(1.0, 0.7 * k);
  const CVec psi = phases(4);
  const DecodingOrder o = DecodingOrder::from_sequence({2, 1, 0});
  for (SinrModel model : {SinrModel::Effective, SinrModel::Uatf}) {
    EvalOptions opts;
    opts.model = model;
    Evaluator ev(scn, p, 70, 3, opts);
    const double before = ev.mse(psi, o).mean;
    const double candidate = ev.training_mse(other, psi, o).mean;
    CHECK(ev.mse(psi, o).mean == before);
    Evaluator moved(scn, p, 70, 3, opts);
    moved.set_training(other);
    CHECK(candidate == doctest::Approx(moved.mse(psi, o).mean).epsilon(1e-10));
  }
}
