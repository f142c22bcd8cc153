// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "rismtc/channel.hpp"
#include "rismtc/rng.hpp"
#include "rismtc/scenario.hpp"
#include "rismtc/types.hpp"

namespace rismtc {

enum class Protocol { Binary, NonBinary };

const char* protocol_name(Protocol p);
Protocol parse_protocol(const std::string& name);

struct TrainingProtocol {
  Protocol kind = Protocol::Binary;
  int G = 1;
  int T = 1;
  CMat upsilon;  // L x T, column t is the RIS configuration of period t
};

// Binary: I_T (x) 1_G. Non-binary: T x T DFT phases replicated over each group.
TrainingProtocol build_training_matrix(Protocol kind, int L, int G);

// S = Upsilon^T (x) I_K, size KT x KL.
CMat training_operator(const CMat& upsilon, int K);

struct PilotBook {
  CMat pilots;  // N x M, column i is p_i
  RVec power;
};

// Scaled DFT rows: p_i[m] = sqrt(P_i) exp(-j 2 pi i m / N).
PilotBook make_pilots(const RVec& power, int N);

// sigma_w^2 / (N P_i); +inf for a silent sensor.
RVec training_noise_variance(const Scenario& scn);

// Moments of g_C,i (Appendix C). Covariances carry the c_i^2 prefactor:
// C_i = c_i^2 (I_L (x) B), B = (1 + F1) I_K + F2 u_R u_R^H.
struct CascadedPrior {
  int K = 0;
  int L = 0;
  double F1 = 0.0;
  std::vector<CVec> mean;  // KL
  RVec c;                  // c_i
  CMat B;                  // K x K
  std::vector<CVec> v;     // v(theta_i)

  CMat covariance(int i) const;
  // Cov(g_C,i, g_C,j) for i != j: F1 c_i c_j (diag(v_i) diag(v_j)^H (x) I_K).
  CMat cross_covariance(int i, int j) const;
};

CascadedPrior cascaded_prior_moments(const Scenario& scn, const ArrayResponses& arr);

struct ObservationStatistics {
  std::vector<CVec> mean;             // KT per sensor
  std::vector<std::vector<CMat>> cov;  // cov[i][j] = C_{z_i, z_j}

  CVec joint_mean() const;
  CMat joint_covariance() const;
};

ObservationStatistics observation_moments(const TrainingProtocol& protocol,
                                          const CascadedPrior& prior, const RVec& noise_var);

struct Observation {
  std::vector<CVec> z;  // KT per sensor
};

// Fresh W_t per period; the direct link is assumed known and removed.
Observation simulate_training(const ChannelRealization& ch, const TrainingProtocol& protocol,
                              const PilotBook& pilots, double sigma2, Rng& rng);

// Correlated training noise W_t conj(p_i) / (N P_i) stacked over t, one KT
// vector per sensor. Draws W_1..W_T (K x N each) in order.
std::vector<CVec> draw_training_noise(const PilotBook& pilots, double sigma2, int K, int T, Rng& rng);

struct CsiEstimate {
  CMat A;          // KL x KT
  CVec b;          // KL
  CMat error_cov;  // KL x KL
  CVec estimate;   // empty until applied to an observation
};

// Dense LMMSE filter for z = S g + n with n ~ CN(0, noise_var I).
CsiEstimate lmmse_filter(const CVec& mean, const CMat& cov, const CMat& S, double noise_var);
CsiEstimate lmmse_estimate(const CVec& z, const CVec& mean, const CMat& cov, const CMat& S,
                           double noise_var);

// LMMSE filter projected on a data configuration psi: G_hat psi = PA z + Pb
// with P = psi^T (x) I_K, and R = P C_err P^H the error covariance of G_hat psi.
struct ProjectedFilter {
  CMat PA;  // K x KT
  CVec Pb;  // K
  CMat R;   // K x K
};

// Exploits C_i = c_i^2 (I_L (x) B): shared across sensors for one Upsilon.
class ProjectedLmmse {
 public:
  ProjectedLmmse(const CascadedPrior& prior, const CMat& upsilon, const RVec& noise_var);
  ProjectedFilter filter(int i, const CVec& psi) const;
  // K x L matrix H with h_hat = q + H psi for observation z.
  CMat estimate_matrix(int i, const CVec& z) const;
  // G_hat psi without forming the K x L estimate; a = weights() * psi.
  CVec estimate_projected(int i, const CVec& z, const CVec& psi, const CVec& a) const;
  const CMat& weights() const { return w_; }
  // Projected error covariance R_i(psi), same as filter(i, psi).R.
  CMat error_covariance(int i, const CVec& psi) const;
  // (y^T (x) I_K) PA_i(psi)^H
  CMat cross_term(int i, const CVec& y, const CVec& psi) const;
  int T() const { return static_cast<int>(upsilon_.cols()); }

 private:
  // C_z,i^+ vec(X) for X of size K x T
  CMat apply_inverse(int i, const CMat& X) const;

  CascadedPrior prior_;
  CMat upsilon_;
  RVec noise_var_;
  CMat uq_, ub_;
  RVec lb_;
  CMat w_;                       // Uq^T Upsilon^H
  std::vector<RVec> inv_;        // eigenvalues of C_z,i^+, index t*K + k
  std::vector<CMat> scale_;      // same values as a K x T grid
  std::vector<CMat> mean_;       // unvec(mu_i), K x L
  std::vector<CMat> s_mean_;     // unvec(S mu_i), K x T
};

}  // namespace rismtc
