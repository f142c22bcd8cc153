// SPDX-License-Identifier: Apache-2.0
#include "rismtc/csi.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rismtc/linalg.hpp"

namespace rismtc {

const char* protocol_name(Protocol p) { return p == Protocol::Binary ? "binary" : "nonbinary"; }

Protocol parse_protocol(const std::string& name) {
  if (name == "binary") return Protocol::Binary;
  if (name == "nonbinary" || name == "non-binary") return Protocol::NonBinary;
  throw ConfigError("unknown protocol '" + name + "' (binary, nonbinary)");
}

TrainingProtocol build_training_matrix(Protocol kind, int L, int G) {
  if (G < 1 || G > L || L % G != 0) throw ConfigError("group size must divide L");
  TrainingProtocol p;
  p.kind = kind;
  p.G = G;
  p.T = L / G;
  p.upsilon = CMat::Zero(L, p.T);
  for (int l = 0; l < L; ++l) {
    const int group = l / G;
    for (int t = 0; t < p.T; ++t) {
      if (kind == Protocol::Binary)
        p.upsilon(l, t) = group == t ? 1.0 : 0.0;
      else
        p.upsilon(l, t) = std::polar(1.0, -2.0 * std::numbers::pi * group * t / p.T);
    }
  }
  return p;
}

CMat training_operator(const CMat& upsilon, int K) {
  return kron(upsilon.transpose(), CMat::Identity(K, K));
}

PilotBook make_pilots(const RVec& power, int N) {
  const int M = static_cast<int>(power.size());
  if (N < M) throw ConfigError("pilot length must be at least M");
  PilotBook book;
  book.power = power;
  book.pilots.resize(N, M);
  for (int i = 0; i < M; ++i)
    for (int m = 0; m < N; ++m)
      book.pilots(m, i) = std::sqrt(power(i)) * std::polar(1.0, -2.0 * std::numbers::pi * i * m / N);
  return book;
}

RVec training_noise_variance(const Scenario& scn) {
  RVec out(scn.M());
  for (int i = 0; i < scn.M(); ++i) {
    const double p = scn.radio.power(i);
    out(i) = p > 0.0 ? scn.radio.sigma2 / (scn.budget.N * p) : std::numeric_limits<double>::infinity();
  }
  return out;
}

CMat CascadedPrior::covariance(int i) const {
  return c(i) * c(i) * kron(CMat::Identity(L, L), B);
}

CMat CascadedPrior::cross_covariance(int i, int j) const {
  const CVec d = v[i].cwiseProduct(v[j].conjugate());
  return F1 * c(i) * c(j) * kron(CMat(d.asDiagonal()), CMat::Identity(K, K));
}

CascadedPrior cascaded_prior_moments(const Scenario& scn, const ArrayResponses& arr) {
  const auto& r = scn.radio;
  CascadedPrior prior;
  prior.K = r.K;
  prior.L = r.L;
  prior.F1 = r.F1;
  prior.v = arr.v_sensor;
  prior.B = (1.0 + r.F1) * CMat::Identity(r.K, r.K) + r.F2 * arr.u_r * arr.u_r.adjoint();
  prior.c.resize(r.M);
  const CMat los = arr.u_r * arr.v_r.adjoint();
  for (int i = 0; i < r.M; ++i) {
    const double c2 = std::pow(scn.geometry.delta(i) * scn.geometry.delta_r, -r.alpha2) /
                      ((1.0 + r.F1) * (1.0 + r.F2));
    prior.c(i) = std::sqrt(c2);
    prior.mean.push_back(prior.c(i) * std::sqrt(r.F1 * r.F2) * vec(los * arr.v_sensor[i].asDiagonal()));
  }
  return prior;
}

CVec ObservationStatistics::joint_mean() const {
  Eigen::Index n = 0;
  for (const auto& m : mean) n += m.size();
  CVec out(n);
  Eigen::Index at = 0;
  for (const auto& m : mean) {
    out.segment(at, m.size()) = m;
    at += m.size();
  }
  return out;
}

CMat ObservationStatistics::joint_covariance() const {
  const Eigen::Index block = mean.empty() ? 0 : mean.front().size();
  const Eigen::Index M = static_cast<Eigen::Index>(mean.size());
  CMat out(M * block, M * block);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j) out.block(i * block, j * block, block, block) = cov[i][j];
  return out;
}

ObservationStatistics observation_moments(const TrainingProtocol& protocol,
                                          const CascadedPrior& prior, const RVec& noise_var) {
  const CMat S = training_operator(protocol.upsilon, prior.K);
  const int M = static_cast<int>(prior.mean.size());
  ObservationStatistics stats;
  stats.cov.assign(M, std::vector<CMat>(M));
  for (int i = 0; i < M; ++i) stats.mean.push_back(S * prior.mean[i]);
  for (int i = 0; i < M; ++i) {
    stats.cov[i][i] = S * prior.covariance(i) * S.adjoint();
    stats.cov[i][i].diagonal().array() += noise_var(i);
    for (int j = i + 1; j < M; ++j) {
      stats.cov[i][j] = S * prior.cross_covariance(i, j) * S.adjoint();
      stats.cov[j][i] = stats.cov[i][j].adjoint();
    }
  }
  return stats;
}

std::vector<CVec> draw_training_noise(const PilotBook& pilots, double sigma2, int K, int T, Rng& rng) {
  const int N = static_cast<int>(pilots.pilots.rows());
  const int M = static_cast<int>(pilots.pilots.cols());
  std::vector<CVec> n(M, CVec::Zero(K * T));
  const double scale = std::sqrt(sigma2);
  for (int t = 0; t < T; ++t) {
    const CMat W = scale * rng.complex_normal_matrix(K, N);
    for (int i = 0; i < M; ++i) {
      const double np = N * pilots.power(i);
      if (np > 0.0) n[i].segment(t * K, K) = W * pilots.pilots.col(i).conjugate() / np;
    }
  }
  return n;
}

Observation simulate_training(const ChannelRealization& ch, const TrainingProtocol& protocol,
                              const PilotBook& pilots, double sigma2, Rng& rng) {
  const int M = static_cast<int>(pilots.pilots.cols());
  const int N = static_cast<int>(pilots.pilots.rows());
  const int K = static_cast<int>(ch.G_R.rows());
  const int T = protocol.T;
  std::vector<CMat> cascaded;
  for (int i = 0; i < M; ++i) cascaded.push_back(ch.cascaded(i));
  Observation obs;
  obs.z.assign(M, CVec::Zero(K * T));
  const double scale = std::sqrt(sigma2);
  for (int t = 0; t < T; ++t) {
    CMat Y = scale * rng.complex_normal_matrix(K, N);
    for (int i = 0; i < M; ++i)
      Y += (cascaded[i] * protocol.upsilon.col(t)) * pilots.pilots.col(i).transpose();
    for (int i = 0; i < M; ++i) {
      const double np = N * pilots.power(i);
      if (np > 0.0) obs.z[i].segment(t * K, K) = Y * pilots.pilots.col(i).conjugate() / np;
    }
  }
  return obs;
}

CsiEstimate lmmse_filter(const CVec& mean, const CMat& cov, const CMat& S, double noise_var) {
  CsiEstimate est;
  if (!std::isfinite(noise_var)) {
    est.A = CMat::Zero(cov.rows(), S.rows());
    est.b = mean;
    est.error_cov = cov;
    return est;
  }
  CMat Cz = S * cov * S.adjoint();
  Cz.diagonal().array() += noise_var;
  const CMat CgS = cov * S.adjoint();
  est.A = CgS * hermitian_pinv(Cz);
  est.b = mean - est.A * (S * mean);
  est.error_cov = hermitian_part(cov - est.A * S * cov);
  return est;
}

CsiEstimate lmmse_estimate(const CVec& z, const CVec& mean, const CMat& cov, const CMat& S,
                           double noise_var) {
  CsiEstimate est = lmmse_filter(mean, cov, S, noise_var);
  est.estimate = est.A * z + est.b;
  return est;
}

ProjectedLmmse::ProjectedLmmse(const CascadedPrior& prior, const CMat& upsilon, const RVec& noise_var)
    : prior_(prior), upsilon_(upsilon), noise_var_(noise_var) {
  const int K = prior.K;
  const int T = static_cast<int>(upsilon.cols());
  const int M = static_cast<int>(prior.mean.size());
  // C_z,i = c_i^2 (Q (x) B) + s_i I with Q = Upsilon^T conj(Upsilon); both
  // factors are diagonalized once.
  const CMat Q = upsilon.transpose() * upsilon.conjugate();
  Eigen::SelfAdjointEigenSolver<CMat> eq(hermitian_part(Q));
  Eigen::SelfAdjointEigenSolver<CMat> eb(hermitian_part(prior.B));
  uq_ = eq.eigenvectors();
  ub_ = eb.eigenvectors();
  lb_ = eb.eigenvalues();
  w_ = uq_.transpose() * upsilon.adjoint();
  RVec base(K * T);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < K; ++k) base(t * K + k) = std::max(0.0, eq.eigenvalues()(t)) * lb_(k);
  for (int i = 0; i < M; ++i) {
    const double c2 = prior.c(i) * prior.c(i);
    RVec inv = RVec::Zero(K * T);
    if (std::isfinite(noise_var(i))) {
      const RVec lambda = (c2 * base).array() + noise_var(i);
      const double cutoff = 1e-12 * lambda.maxCoeff();
      for (int k = 0; k < K * T; ++k)
        if (lambda(k) > cutoff && lambda(k) > 0.0) inv(k) = 1.0 / lambda(k);
    }
    inv_.push_back(inv);
    scale_.push_back(Eigen::Map<const RMat>(inv.data(), K, T).cast<cd>());
    mean_.push_back(unvec(prior.mean[i], K, prior.L));
    s_mean_.push_back(mean_.back() * upsilon);
  }
}

CMat ProjectedLmmse::apply_inverse(int i, const CMat& X) const {
  const CMat Y = scale_[i].cwiseProduct(ub_.adjoint() * X * uq_.conjugate());
  return ub_ * Y * uq_.transpose();
}

ProjectedFilter ProjectedLmmse::filter(int i, const CVec& psi) const {
  const int K = prior_.K;
  const int T = this->T();
  const double c2 = prior_.c(i) * prior_.c(i);
  const CVec w = upsilon_.adjoint() * psi;
  // row r of PA is c^2 (C_z^+ vec(B e_r w^H))^H
  ProjectedFilter out;
  out.PA.resize(K, K * T);
  for (int r = 0; r < K; ++r) {
    const CMat col = apply_inverse(i, prior_.B.col(r) * w.adjoint());
    out.PA.row(r) = c2 * vec(col).adjoint();
  }
  out.Pb = mean_[i] * psi - out.PA * vec(s_mean_[i]);
  out.R = error_covariance(i, psi);
  return out;
}

CMat ProjectedLmmse::estimate_matrix(int i, const CVec& z) const {
  const int K = prior_.K;
  const double c2 = prior_.c(i) * prior_.c(i);
  // unvec(mu) + c^2 B unvec(C_z^+ (z - S mu)) Upsilon^H, with B Ub = Ub diag(lb)
  const CMat R = Eigen::Map<const CMat>(z.data(), K, T()) - s_mean_[i];
  CMat Y = scale_[i].cwiseProduct(ub_.adjoint() * R * uq_.conjugate());
  for (int k = 0; k < K; ++k) Y.row(k) *= c2 * lb_(k);
  return mean_[i] + ub_ * Y * w_;
}

CVec ProjectedLmmse::estimate_projected(int i, const CVec& z, const CVec& psi, const CVec& a) const {
  const int K = prior_.K;
  const double c2 = prior_.c(i) * prior_.c(i);
  const CMat R = Eigen::Map<const CMat>(z.data(), K, T()) - s_mean_[i];
  const CMat Y = scale_[i].cwiseProduct(ub_.adjoint() * R * uq_.conjugate());
  CVec y = Y * a;
  for (int k = 0; k < K; ++k) y(k) *= c2 * lb_(k);
  return mean_[i] * psi + ub_ * y;
}

CMat ProjectedLmmse::error_covariance(int i, const CVec& psi) const {
  const int K = prior_.K;
  const int T = this->T();
  const double c2 = prior_.c(i) * prior_.c(i);
  // (w^T (x) B) C_z^+ (conj(w) (x) B) = Ub diag(sum_t |a_t|^2 lb^2 inv_t) Ub^H, a = Uq^T w
  const CVec a = w_ * psi;
  RVec d = RVec::Zero(K);
  for (int t = 0; t < T; ++t) {
    const double at = std::norm(a(t));
    for (int k = 0; k < K; ++k) d(k) += at * lb_(k) * lb_(k) * inv_[i](t * K + k);
  }
  const RVec diag = (c2 * psi.squaredNorm()) * lb_.array() - (c2 * c2) * d.array();
  return hermitian_part(ub_ * diag.cast<cd>().asDiagonal() * ub_.adjoint());
}

CMat ProjectedLmmse::cross_term(int i, const CVec& y, const CVec& psi) const {
  const int K = prior_.K;
  const double c2 = prior_.c(i) * prior_.c(i);
  const CVec a = w_ * psi;
  const CVec alpha = uq_.transpose() * y;
  CVec d = CVec::Zero(K);
  for (int t = 0; t < T(); ++t) {
    const cd at = alpha(t) * std::conj(a(t));
    for (int k = 0; k < K; ++k) d(k) += at * (lb_(k) * inv_[i](t * K + k));
  }
  return c2 * ub_ * d.asDiagonal() * ub_.adjoint();
}

}  // namespace rismtc
