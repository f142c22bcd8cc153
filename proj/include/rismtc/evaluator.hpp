// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "rismtc/channel.hpp"
#include "rismtc/csi.hpp"
#include "rismtc/decoding.hpp"
#include "rismtc/scenario.hpp"

namespace rismtc {

enum class SinrModel { Effective, Uatf };

struct EvalOptions {
  SinrModel model = SinrModel::Effective;
  UatfMode uatf_mode = UatfMode::Bound;
  bool perfect_csi = false;  // h_hat = h, no estimation error
  bool sic = true;
  int allowed_failures = 1;  // no-SIC outcome model
  int threads = 1;
};

// Runs fn(begin, end) over [0, n) on up to `threads` workers (static split).
void parallel_for(int n, int threads, const std::function<void(int, int)>& fn);

// Order-independent pairwise summation.
double pairwise_sum(const double* values, std::size_t n);

struct MseEstimate {
  double mean = 0.0;
  double stderr = 0.0;
  int trials = 0;
};

MseEstimate summarize(const std::vector<double>& samples);

// One coherence block: channels and the stacked training noise.
struct TrialDraw {
  std::vector<CVec> q;
  std::vector<CVec> g;
  CMat G_R;
  std::vector<CVec> noise;  // KT per sensor
};

// Per-trial stream derive_seed(seed, trial): chi, tau, Delta, then W_1..W_T.
TrialDraw draw_trial(const Scenario& scn, const ArrayResponses& arr, const PilotBook& pilots,
                     std::uint64_t trial_seed);

class TrialBank {
 public:
  TrialBank(const Scenario& scn, int trials, std::uint64_t seed, int threads = 1);
  int size() const { return static_cast<int>(draws_.size()); }
  const TrialDraw& operator[](int t) const { return draws_[t]; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<TrialDraw> draws_;
  std::uint64_t seed_;
};

// Average MSE of Eq. 21 over a fixed bank of draws (common random numbers).
class Evaluator {
 public:
  Evaluator(const Scenario& scn, const TrainingProtocol& protocol, int trials, std::uint64_t seed,
            EvalOptions opts);
  Evaluator(const Scenario& scn, const TrainingProtocol& protocol,
            std::shared_ptr<const TrialBank> bank, EvalOptions opts);

  // Per-trial terms (one entry for UatF, which is deterministic).
  std::vector<LinkTerms> link_terms(const CVec& psi) const;

  MseEstimate mse(const std::vector<LinkTerms>& terms, const DecodingOrder& order) const;
  // Only the first prefix.size() sensors are decoded; the rest interfere.
  MseEstimate truncated_mse(const std::vector<LinkTerms>& terms, const std::vector<int>& prefix) const;
  MseEstimate mse(const CVec& psi, const DecodingOrder& order) const;

  // Mean over trials of P_i |f_i^H h_hat_i|^2 (UatF: P_i |E[f^H h]|^2).
  RVec received_power(const std::vector<LinkTerms>& terms) const;

  UatfInputs uatf_inputs(const CVec& psi) const;

  // MSE for `order` as a function of psi_l, the other elements held at psi.
  std::function<double(cd)> psi_coordinate(const CVec& psi, Eigen::Index l,
                                           const DecodingOrder& order) const;

  void set_training(const CMat& upsilon);
  // MSE as if set_training(upsilon) had been called, leaving the state as is.
  MseEstimate training_mse(const CMat& upsilon, const CVec& psi, const DecodingOrder& order);
  const TrainingProtocol& protocol() const { return protocol_; }
  const Scenario& scenario() const { return scn_; }
  const EvalOptions& options() const { return opts_; }
  std::shared_ptr<const TrialBank> bank() const { return bank_; }
  long evaluations() const { return evaluations_.load(); }

 private:
  double trial_mse(const LinkTerms& t, const std::vector<int>& prefix, const RVec& eps) const;
  std::vector<CMat> error_covariances(const CVec& psi) const;

  Scenario scn_;
  TrainingProtocol protocol_;
  EvalOptions opts_;
  ArrayResponses arr_;
  CascadedPrior prior_;
  RVec noise_var_;
  std::shared_ptr<const TrialBank> bank_;
  std::unique_ptr<ProjectedLmmse> lmmse_;
  std::vector<std::vector<CMat>> H_;  // [trial][sensor], h_hat = q + H psi
  mutable std::atomic<long> evaluations_{0};
};

// Independent reference: draws each trial afresh, simulates the full training
// round and uses dense LMMSE filters. Effective-SINR model only.
MseEstimate average_mse_streaming(const Scenario& scn, const TrainingProtocol& protocol,
                                  const CVec& psi, const DecodingOrder& order, int trials,
                                  std::uint64_t seed, bool sic = true, int allowed_failures = 1);

}  // namespace rismtc
