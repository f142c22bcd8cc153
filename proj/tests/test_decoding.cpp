// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "rismtc/decoding.hpp"
#include "rismtc/linalg.hpp"
#include "rismtc/rng.hpp"

using namespace rismtc;

namespace {

CMat random_psd(int n, Rng& rng) {
  const CMat X = rng.complex_normal_matrix(n, n);
  return X * X.adjoint() / double(n);
}

RMat random_spd(int n, std::mt19937_64& gen, double ridge) {
  std::normal_distribution<double> nd;
  RMat X(n, n + 2);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n + 2; ++b) X(a, b) = nd(gen);
  return X * X.transpose() / double(n) + ridge * RMat::Identity(n, n);
}

// Independent LMMSE oracle written out with a dense inverse.
double brute_mse(const RMat& Ct, const RMat& Ce, const std::vector<int>& decoded) {
  if (decoded.empty()) return Ct.trace();
  const int M = static_cast<int>(Ct.rows());
  RMat V = RMat::Zero(decoded.size(), M);
  for (std::size_t a = 0; a < decoded.size(); ++a) V(a, decoded[a]) = 1.0;
  const RMat inner = V * (Ct + Ce) * V.transpose();
  return (Ct - Ct * V.transpose() * inner.inverse() * V * Ct).trace();
}

double oracle_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("decoding order bookkeeping") {
  const DecodingOrder o = DecodingOrder::from_steps({1, 2, 0});
  CHECK(o.sequence() == std::vector<int>{2, 0, 1});
  CHECK(DecodingOrder::from_sequence({2, 0, 1}) == o);
  CHECK(o.to_string() == "[2,3,1]");
  DecodingOrder p = o;
  p.swap_steps(0, 2);
  CHECK(p.sequence() == std::vector<int>{1, 0, 2});
  CHECK_THROWS(DecodingOrder::from_steps({0, 0, 1}));
  CHECK(is_permutation({3, 1, 0, 2}));
  CHECK_FALSE(is_permutation({3, 1, 4, 2}));
}

TEST_CASE("kappa closed cases") {
  const int K = 3, L = 4;
  CVec psi(L);
  for (int l = 0; l < L; ++l) psi(l) = std::polar(1.0, 0.9 * l);
  CVec f = CVec::Zero(K);
  f(1) = cd(0.6, 0.8);
  CHECK(kappa(CMat::Zero(K * L, K * L), psi, f) == 0.0);
  CHECK(kappa(CMat::Identity(K * L, K * L), psi, f) == doctest::Approx(double(L)).epsilon(1e-12));
}

TEST_CASE("kappa equals the sampled error power") {
  const int K = 2, L = 3;
  Rng rng(21);
  const CMat C = random_psd(K * L, rng);
  const Eigen::LLT<CMat> chol(C);
  const CMat Lc = chol.matrixL();
  const CVec psi = rng.complex_normal_vector(L);
  const CVec f = rng.complex_normal_vector(K);
  const int n = 100000;
  double acc = 0.0;
  for (int t = 0; t < n; ++t) {
    const CVec e = Lc * rng.complex_normal_vector(K * L);
    acc += std::norm(f.dot(unvec(e, K, L) * psi));
  }
  const double k = kappa(C, psi, f);
  CHECK(acc / n == doctest::Approx(k).epsilon(0.03));
  const CMat P = kron(CMat(psi.transpose()), CMat::Identity(K, K));
  CHECK(kappa_projected(P * C * P.adjoint(), f) == doctest::Approx(k).epsilon(1e-12));
}

TEST_CASE("matched-filter SNR for one sensor") {
  const CVec h = (CVec(3) << cd(1, 2), cd(-0.5, 0.1), cd(0.3, 0.3)).finished();
  const RVec P = RVec::Constant(1, 0.2);
  const LinkTerms t = effective_link_terms({h}, {h}, {CMat::Zero(3, 3)}, P, 0.01);
  const RVec rho = sinr_for_order(t, DecodingOrder::identity(1));
  CHECK(rho(0) == doctest::Approx(0.2 * h.squaredNorm() / 0.01).epsilon(1e-12));
  CHECK_THROWS(effective_link_terms({CVec::Zero(3)}, {h}, {CMat::Zero(3, 3)}, P, 0.01));
}

TEST_CASE("perfect-CSI SINR along an order") {
  Rng rng(5);
  const int M = 4, K = 3;
  std::vector<CVec> h;
  for (int i = 0; i < M; ++i) h.push_back(rng.complex_normal_vector(K));
  const RVec P = (RVec(M) << 1.0, 0.5, 2.0, 0.7).finished();
  const double s2 = 0.3;
  const DecodingOrder o = DecodingOrder::from_sequence({2, 0, 3, 1});
  const LinkTerms t = effective_link_terms(h, h, std::vector<CMat>(M, CMat::Zero(K, K)), P, s2);
  const RVec rho = sinr_for_order(t, o);
  for (int i = 0; i < M; ++i) {
    double denom = s2 * h[i].squaredNorm();
    for (int j = 0; j < M; ++j)
      if (o.step(j) > o.step(i)) denom += P(j) * std::norm(h[i].dot(h[j]));
    CHECK(rho(i) == doctest::Approx(P(i) * std::pow(h[i].squaredNorm(), 2) / denom).epsilon(1e-12));
  }
  // the last decoded sensor sees no interference
  CHECK(rho(1) == doctest::Approx(P(1) * h[1].squaredNorm() / s2).epsilon(1e-12));
}

TEST_CASE("two evaluation paths of the effective SINR agree") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const int M = 2, K = 2, L = 3;
    const CVec psi = rng.complex_normal_vector(L);
    std::vector<CVec> h;
    std::vector<CMat> C, R;
    const CMat P = kron(CMat(psi.transpose()), CMat::Identity(K, K));
    for (int i = 0; i < M; ++i) {
      h.push_back(rng.complex_normal_vector(K));
      C.push_back(random_psd(K * L, rng));
      R.push_back(P * C.back() * P.adjoint());
    }
    const RVec power = (RVec(2) << 1.0 + seed, 0.5).finished();
    for (const auto& o : {DecodingOrder::identity(2), DecodingOrder::from_sequence({1, 0})}) {
      const RVec a = sinr_for_order(effective_link_terms(h, h, R, power, 0.1), o);
      const RVec b = effective_sinr_decomposed(h, h, C, psi, power, 0.1, o);
      for (int i = 0; i < M; ++i) CHECK(std::abs(a(i) - b(i)) <= 1e-12 * std::abs(b(i)));
    }
  }
}

TEST_CASE("finite blocklength PER") {
  for (double rho : {0.5, 1.0, 3.0})
    for (int n : {50, 100}) CHECK(std::abs(fbl_per(rho, n, std::log2(1.0 + rho)) - 0.5) <= 1e-12);
  CHECK(fbl_per(0.0, 100, 1.0) == 1.0);
  CHECK(fbl_per(-1.0, 100, 1.0) == 1.0);
  CHECK(fbl_per(INFINITY, 100, 1.0) == 0.0);

  const double log2e = 1.0 / std::log(2.0);
  const double V3 = (1.0 - 1.0 / 16.0) * log2e * log2e;
  CHECK(V3 == doctest::Approx(1.951283419692757).epsilon(1e-14));
  const double x = std::sqrt(100.0) * (2.0 - 1.0) / std::sqrt(V3);
  CHECK(x == doctest::Approx(7.158793298078116).epsilon(1e-14));
  CHECK(fbl_per(3.0, 100, 1.0) == doctest::Approx(oracle_q(x)).epsilon(1e-12));
  CHECK(fbl_per(3.0, 100, 1.0) == doctest::Approx(4.069514898933360e-13).epsilon(1e-9));
}

TEST_CASE("PER monotonicity") {
  for (double rho = 0.5; rho < 20.0; rho *= 1.3) {
    const double R = 0.5;
    if (std::log2(1 + rho) <= R) continue;
    CHECK(fbl_per(rho * 1.3, 40, R) <= fbl_per(rho, 40, R));
    CHECK(fbl_per(rho, 60, R) <= fbl_per(rho, 40, R));
    CHECK(fbl_per(rho, 40, R + 0.1) >= fbl_per(rho, 40, R));
  }
  // strictly, where the value is not saturated
  CHECK(fbl_per(1.2, 40, 0.9) < fbl_per(1.0, 40, 0.9));
  CHECK(fbl_per(1.2, 60, 0.9) < fbl_per(1.2, 40, 0.9));
}

TEST_CASE("PER bounds") {
  const PerBounds zero = per_bounds(RVec::Zero(4));
  CHECK(zero.lower.isZero());
  CHECK(zero.upper.isZero());
  const PerBounds first = per_bounds((RVec(3) << 1.0, 0.1, 0.0).finished());
  CHECK(first.upper == RVec::Ones(3));
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u;
  for (int rep = 0; rep < 100; ++rep) {
    RVec p(6);
    for (int k = 0; k < 6; ++k) p(k) = u(gen) * 0.3;
    const PerBounds b = per_bounds(p);
    CHECK((b.lower.array() <= b.upper.array()).all());
    CHECK(b.upper(5) <= 1.0);
  }
}

TEST_CASE("outcome tree") {
  const RVec z = outcome_probabilities(RVec::Zero(3));
  CHECK(z == (RVec(4) << 0, 0, 0, 1).finished());
  const RVec o = outcome_probabilities(RVec::Ones(3));
  CHECK(o == (RVec(4) << 1, 0, 0, 0).finished());
  const RVec phi = outcome_probabilities((RVec(3) << 0.1, 0.2, 0.3).finished());
  CHECK(phi(0) == 0.1);
  CHECK(phi(1) == doctest::Approx(0.9 * 0.2).epsilon(1e-15));
  CHECK(phi(2) == doctest::Approx(0.9 * 0.8 * 0.3).epsilon(1e-15));
  CHECK(phi(3) == doctest::Approx(0.9 * 0.8 * 0.7).epsilon(1e-15));
  CHECK(std::abs(phi.sum() - 1.0) <= 1e-12);

  // independent Bernoulli chains
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u;
  const double per[3] = {0.1, 0.2, 0.3};
  RVec counts = RVec::Zero(4);
  const int n = 1000000;
  for (int t = 0; t < n; ++t) {
    int s = 0;
    while (s < 3 && u(gen) >= per[s]) ++s;
    counts(s) += 1.0;
  }
  for (int s = 0; s < 4; ++s) {
    const double se = std::sqrt(phi(s) * (1 - phi(s)) / n);
    CHECK(std::abs(counts(s) / n - phi(s)) < 3.0 * se);
  }
}

TEST_CASE("outcome probabilities sum to one") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u;
  for (int rep = 0; rep < 1000; ++rep) {
    const int M = 1 + rep % 10;
    RVec p(M);
    for (int k = 0; k < M; ++k) p(k) = u(gen);
    const RVec phi = outcome_probabilities(p);
    CHECK(std::abs(phi.sum() - 1.0) <= 1e-12);
    CHECK((phi.array() >= 0.0).all());
  }
}

TEST_CASE("conditional MSE") {
  ParameterStatistics st;
  st.mean = RVec::Zero(2);
  const double rc = 0.6, s2 = 0.25;
  st.C_theta = (RMat(2, 2) << 1, rc, rc, 1).finished();
  st.C_eta = s2 * RMat::Identity(2, 2);
  CHECK(conditional_mse(st, {}) == 2.0);
  const double expected = (1 - 1 / (1 + s2)) + (1 - rc * rc / (1 + s2));
  CHECK(conditional_mse(st, {0}) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(conditional_mse(st, {0}) == doctest::Approx(brute_mse(st.C_theta, st.C_eta, {0})).epsilon(1e-14));
  st.C_eta.setZero();
  CHECK(std::abs(conditional_mse(st, {0, 1})) < 1e-14);
  // singular inner block falls back to the pseudo-inverse
  st.C_theta = RMat::Ones(2, 2);
  CHECK(std::abs(conditional_mse(st, {0, 1})) < 1e-12);
}

TEST_CASE("conditional MSE matches a dense oracle and never increases with more data") {
  std::mt19937_64 gen(8);
  for (int rep = 0; rep < 50; ++rep) {
    const int M = 2 + rep % 5;
    ParameterStatistics st;
    st.mean = RVec::Zero(M);
    st.C_theta = random_spd(M, gen, 0.0);
    st.C_eta = RMat::Zero(M, M);
    for (int i = 0; i < M; ++i) st.C_eta(i, i) = 0.05 + 0.1 * i;
    std::vector<int> seq(M);
    for (int i = 0; i < M; ++i) seq[i] = (i * 3 + rep) % M;
    if (!is_permutation(seq)) std::iota(seq.begin(), seq.end(), 0);
    const RVec eps = prefix_mse(st, seq);
    for (int s = 0; s <= M; ++s) {
      const std::vector<int> dec(seq.begin(), seq.begin() + s);
      CHECK(eps(s) == doctest::Approx(brute_mse(st.C_theta, st.C_eta, dec)).epsilon(1e-9));
      if (s > 0) CHECK(eps(s) <= eps(s - 1) + 1e-10);
    }
  }
}

TEST_CASE("total MSE is a convex combination") {
  const RVec eps = (RVec(4) << 3.0, 2.0, 1.5, 0.4).finished();
  CHECK(conditional_total_mse((RVec(4) << 0, 0, 0, 1).finished(), eps) == 0.4);
  CHECK(conditional_total_mse((RVec(4) << 1, 0, 0, 0).finished(), eps) == 3.0);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u;
  for (int rep = 0; rep < 100; ++rep) {
    RVec p(3);
    for (int k = 0; k < 3; ++k) p(k) = u(gen);
    const double e = conditional_total_mse(outcome_probabilities(p), eps);
    CHECK(e >= eps.minCoeff() - 1e-15);
    CHECK(e <= eps(0) + 1e-15);
  }
}

TEST_CASE("nmse") {
  const RMat C = RMat::Identity(3, 3) * 2.0;
  CHECK(nmse(6.0, C) == 1.0);
  CHECK(nmse(0.0, C) == 0.0);
  CHECK(nmse(3.0, C) == 0.5);
  CHECK_THROWS(nmse(1.0, RMat::Zero(2, 2)));
}

TEST_CASE("no-SIC outcome model") {
  ParameterStatistics st;
  st.mean = RVec::Zero(3);
  st.C_theta = (RMat(3, 3) << 1, 0.3, 0.1, 0.3, 2, 0.2, 0.1, 0.2, 1.5).finished();
  st.C_eta = 0.1 * RMat::Identity(3, 3);
  CHECK(no_sic_mse(st, RVec::Zero(3), 1) == doctest::Approx(conditional_mse(st, {0, 1, 2})));
  CHECK(no_sic_mse(st, RVec::Ones(3), 1) == doctest::Approx(st.C_theta.trace()));

  // one sensor: same as the SIC outcome tree
  ParameterStatistics one;
  one.mean = RVec::Zero(1);
  one.C_theta = RMat::Constant(1, 1, 2.0);
  one.C_eta = RMat::Constant(1, 1, 0.3);
  const RVec p = RVec::Constant(1, 0.27);
  CHECK(no_sic_mse(one, p, 1) ==
        doctest::Approx(conditional_total_mse(outcome_probabilities(p), prefix_mse(one, {0}))).epsilon(1e-14));

  // hand enumeration with at most one failure
  const RVec q = (RVec(3) << 0.1, 0.2, 0.3).finished();
  const double all = 0.9 * 0.8 * 0.7;
  double expected = all * conditional_mse(st, {0, 1, 2});
  expected += 0.1 * 0.8 * 0.7 * conditional_mse(st, {1, 2});
  expected += 0.9 * 0.2 * 0.7 * conditional_mse(st, {0, 2});
  expected += 0.9 * 0.8 * 0.3 * conditional_mse(st, {0, 1});
  const double rest = 1.0 - all - 0.1 * 0.8 * 0.7 - 0.9 * 0.2 * 0.7 - 0.9 * 0.8 * 0.3;
  expected += rest * st.C_theta.trace();
  CHECK(no_sic_mse(st, q, 1) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("UatF with zero means") {
  Rng rng(3);
  const int K = 3;
  UatfInputs in;
  in.power = RVec::Constant(1, 0.5);
  in.sigma2 = 0.1;
  const CMat C = random_psd(K, rng) + CMat::Identity(K, K);
  const CMat Ch = 0.6 * C;
  in.mean = {CVec::Zero(K)};
  in.cov = {C};
  in.cov_hat = {Ch};
  in.cross = {{Ch}};
  const LinkTerms t = uatf_link_terms(in, UatfMode::Exact);
  const double tr = Ch.trace().real();
  CHECK(t.signal(0) == doctest::Approx(0.5 * tr * tr).epsilon(1e-14));

  // E|h_hat^H h|^2 = tr(C_hat C) + |tr C_hat|^2 for h = h_hat + e, e independent
  const Eigen::LLT<CMat> a(Ch);
  const Eigen::LLT<CMat> b(C - Ch);
  const CMat La = a.matrixL(), Lb = b.matrixL();
  double acc = 0.0;
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    const CVec hh = La * rng.complex_normal_vector(K);
    const CVec h = hh + Lb * rng.complex_normal_vector(K);
    acc += std::norm(hh.dot(h));
  }
  const double identity = (Ch * C).trace().real() + tr * tr;
  CHECK(acc / n == doctest::Approx(identity).epsilon(0.03));
  CHECK((t.decoded(0, 0) + t.signal(0)) / 0.5 == doctest::Approx(identity).epsilon(1e-12));
  const LinkTerms bound = uatf_link_terms(in, UatfMode::Bound);
  CHECK((bound.decoded(0, 0) + bound.signal(0)) / 0.5 == doctest::Approx(2 * identity).epsilon(1e-12));
}

TEST_CASE("UatF with deterministic channels is the plain SINR") {
  Rng rng(6);
  const int M = 3, K = 2;
  UatfInputs in;
  in.power = (RVec(M) << 1.0, 0.4, 2.0).finished();
  in.sigma2 = 0.05;
  std::vector<CVec> h;
  for (int i = 0; i < M; ++i) {
    h.push_back(rng.complex_normal_vector(K));
    in.mean.push_back(h.back());
    in.cov.push_back(CMat::Zero(K, K));
    in.cov_hat.push_back(CMat::Zero(K, K));
  }
  in.cross.assign(M, std::vector<CMat>(M, CMat::Zero(K, K)));
  const DecodingOrder o = DecodingOrder::from_sequence({1, 2, 0});
  const RVec rho = sinr_for_order(uatf_link_terms(in, UatfMode::Exact), o);
  for (int i = 0; i < M; ++i) {
    double denom = in.sigma2 * h[i].squaredNorm();
    for (int j = 0; j < M; ++j)
      if (o.step(j) > o.step(i)) denom += in.power(j) * std::norm(h[i].dot(h[j]));
    CHECK(rho(i) == doctest::Approx(in.power(i) * std::pow(h[i].squaredNorm(), 2) / denom).epsilon(1e-12));
  }
}
