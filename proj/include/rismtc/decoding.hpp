// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "rismtc/scenario.hpp"
#include "rismtc/types.hpp"

namespace rismtc {

// o_i = step at which sensor i is decoded. Steps and sensors are 0-based in
// the API and 1-based in text.
class DecodingOrder {
 public:
  DecodingOrder() = default;
  static DecodingOrder identity(int M);
  static DecodingOrder from_steps(std::vector<int> steps);
  // sequence[s] = sensor decoded at step s
  static DecodingOrder from_sequence(const std::vector<int>& sequence);

  int size() const { return static_cast<int>(steps_.size()); }
  int step(int sensor) const { return steps_[sensor]; }
  const std::vector<int>& steps() const { return steps_; }
  std::vector<int> sequence() const;
  // Exchange the sensors sitting at steps a and b.
  void swap_steps(int a, int b);
  std::string to_string() const;

  bool operator==(const DecodingOrder& other) const { return steps_ == other.steps_; }

 private:
  std::vector<int> steps_;
};

bool is_permutation(const std::vector<int>& values);

// E|f^H G_err psi|^2 = a^H C a with a = conj(psi) (x) f.
double kappa(const CMat& error_cov, const CVec& psi, const CVec& f);
// Same quantity from R = P C P^H, P = psi^T (x) I_K.
double kappa_projected(const CMat& R, const CVec& f);

// Order-independent pieces of a per-sensor SINR
//   rho_i = signal_i / (floor_i + sum_{decoded j} decoded(i,j) + sum_{undecoded j} undecoded(i,j))
// where "decoded" means o_j <= o_i (including i itself).
struct LinkTerms {
  RVec signal;
  RVec floor;
  RMat decoded;    // empty when zero (effective SINR)
  RMat undecoded;
};

// Effective SINR with MRC filters f_i = h_hat_i: signal P_i |f^H h_hat_i|^2,
// floor sigma^2 |f|^2 + sum_j P_j kappa_ij, undecoded P_j |f_i^H h_hat_j|^2.
LinkTerms effective_link_terms(const std::vector<CVec>& filters, const std::vector<CVec>& h_hat,
                               const std::vector<CMat>& R, const RVec& power, double sigma2);

// SINR of the sensors in `prefix` (decoded in that order); every sensor not
// in the prefix counts as undecoded interference. Result indexed like prefix.
RVec sinr_along(const LinkTerms& terms, const std::vector<int>& prefix);
// Full order, indexed by sensor.
RVec sinr_for_order(const LinkTerms& terms, const DecodingOrder& order);
// No cancellation: everyone but i interferes.
RVec sinr_without_sic(const LinkTerms& terms);

// Appendix A route: desired, estimation-noise and effective-noise variances
// assembled separately. Indexed by sensor.
RVec effective_sinr_decomposed(const std::vector<CVec>& filters, const std::vector<CVec>& h_hat,
                               const std::vector<CMat>& error_cov, const CVec& psi,
                               const RVec& power, double sigma2, const DecodingOrder& order);

double q_function(double x);
double fbl_per(double rho, int n_s, double rate);

struct PerBounds {
  RVec lower;
  RVec upper;
};
PerBounds per_bounds(const RVec& conditional_per);

// phi_0..phi_s for PERs listed along the decoding order.
RVec outcome_probabilities(const RVec& per_along_order);

double conditional_mse(const ParameterStatistics& stats, const std::vector<int>& decoded);
// eps_0..eps_s for the prefixes of `sequence`.
RVec prefix_mse(const ParameterStatistics& stats, const std::vector<int>& sequence);
double conditional_total_mse(const RVec& phi, const RVec& eps);
double nmse(double eps, const RMat& C_theta);

// No-SIC outcome: independent PERs; the estimate uses every decoded packet as
// long as at most `allowed_failures` are lost, otherwise nothing.
double no_sic_mse(const ParameterStatistics& stats, const RVec& per, int allowed_failures);

enum class UatfMode {
  Bound,  // second moments doubled as written (|a+b|^2 <= 2(|a|^2+|b|^2))
  Exact   // Gaussian second moments without the factor 2
};

struct UatfInputs {
  std::vector<CVec> mean;                // mu_i = E[h_i] = E[h_hat_i]
  std::vector<CMat> cov_hat;             // C_hat_i
  std::vector<CMat> cov;                 // C_i
  std::vector<std::vector<CMat>> cross;  // cross[i][j] = Cov(h_j, h_hat_i)
  RVec power;
  double sigma2 = 0.0;
};

LinkTerms uatf_link_terms(const UatfInputs& in, UatfMode mode);

}  // namespace rismtc
