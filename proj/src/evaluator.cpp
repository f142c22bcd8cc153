// SPDX-License-Identifier: Apache-2.0
#include "rismtc/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rismtc/linalg.hpp"
#include "rismtc/rng.hpp"

namespace rismtc {

void parallel_for(int n, int threads, const std::function<void(int, int)>& fn) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (auto& t : pool) t.join();
}

double pairwise_sum(const double* values, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

MseEstimate summarize(const std::vector<double>& samples) {
  MseEstimate out;
  out.trials = static_cast<int>(samples.size());
  if (samples.empty()) return out;
  const double n = static_cast<double>(samples.size());
  out.mean = pairwise_sum(samples.data(), samples.size()) / n;
  if (samples.size() > 1) {
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = (samples[i] - out.mean) * (samples[i] - out.mean);
    out.stderr = std::sqrt(pairwise_sum(sq.data(), sq.size()) / (n - 1.0) / n);
  }
  return out;
}

TrialDraw draw_trial(const Scenario& scn, const ArrayResponses& arr, const PilotBook& pilots,
                     std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  ChannelRealization ch = draw_channels(scn, arr, rng);
  TrialDraw d;
  d.q = std::move(ch.q);
  d.g = std::move(ch.g);
  d.G_R = std::move(ch.G_R);
  d.noise = draw_training_noise(pilots, scn.radio.sigma2, scn.K(), scn.budget.T, rng);
  return d;
}

TrialBank::TrialBank(const Scenario& scn, int trials, std::uint64_t seed, int threads) : seed_(seed) {
  const ArrayResponses arr = array_responses(scn);
  const PilotBook pilots = make_pilots(scn.radio.power, scn.budget.N);
  draws_.resize(std::max(trials, 0));
  parallel_for(static_cast<int>(draws_.size()), threads, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) draws_[t] = draw_trial(scn, arr, pilots, derive_seed(seed, t));
  });
}

Evaluator::Evaluator(const Scenario& scn, const TrainingProtocol& protocol, int trials,
                     std::uint64_t seed, EvalOptions opts)
    : Evaluator(scn, protocol,
                opts.model == SinrModel::Uatf ? std::make_shared<TrialBank>(scn, 0, seed)
                                              : std::make_shared<TrialBank>(scn, trials, seed, opts.threads),
                opts) {}

Evaluator::Evaluator(const Scenario& scn, const TrainingProtocol& protocol,
                     std::shared_ptr<const TrialBank> bank, EvalOptions opts)
    : scn_(scn), protocol_(protocol), opts_(opts), bank_(std::move(bank)) {
  if (protocol.T != scn.budget.T) throw std::invalid_argument("training protocol does not match budget T");
  arr_ = array_responses(scn_);
  prior_ = cascaded_prior_moments(scn_, arr_);
  noise_var_ = training_noise_variance(scn_);
  set_training(protocol.upsilon);
}

void Evaluator::set_training(const CMat& upsilon) {
  protocol_.upsilon = upsilon;
  lmmse_ = std::make_unique<ProjectedLmmse>(prior_, upsilon, noise_var_);
  const int M = scn_.M();
  H_.assign(bank_->size(), {});
  parallel_for(bank_->size(), opts_.threads, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const TrialDraw& d = (*bank_)[t];
      H_[t].resize(M);
      for (int i = 0; i < M; ++i) {
        if (opts_.perfect_csi)
          H_[t][i] = d.G_R * d.g[i].asDiagonal();
        else
          H_[t][i] = lmmse_->estimate_matrix(i, vec(d.G_R * (d.g[i].asDiagonal() * upsilon)) + d.noise[i]);
      }
    }
  });
}

MseEstimate Evaluator::training_mse(const CMat& upsilon, const CVec& psi, const DecodingOrder& order) {
  if (opts_.perfect_csi) return mse(psi, order);
  auto lmmse = std::make_unique<ProjectedLmmse>(prior_, upsilon, noise_var_);
  if (opts_.model == SinrModel::Uatf) {
    std::swap(lmmse, lmmse_);
    const MseEstimate out = mse(psi, order);
    std::swap(lmmse, lmmse_);
    return out;
  }
  const int M = scn_.M();
  std::vector<CMat> R;
  for (int i = 0; i < M; ++i) R.push_back(lmmse->error_covariance(i, psi));
  const CVec a = lmmse->weights() * psi;
  std::vector<LinkTerms> terms(bank_->size());
  parallel_for(bank_->size(), opts_.threads, [&](int begin, int end) {
    std::vector<CVec> h_hat(M);
    for (int t = begin; t < end; ++t) {
      const TrialDraw& d = (*bank_)[t];
      for (int i = 0; i < M; ++i) {
        const CVec z = vec(d.G_R * (d.g[i].asDiagonal() * upsilon)) + d.noise[i];
        h_hat[i] = d.q[i] + lmmse->estimate_projected(i, z, psi, a);
      }
      terms[t] = effective_link_terms(h_hat, h_hat, R, scn_.radio.power, scn_.radio.sigma2);
    }
  });
  return mse(terms, order);
}

std::vector<CMat> Evaluator::error_covariances(const CVec& psi) const {
  std::vector<CMat> R;
  for (int i = 0; i < scn_.M(); ++i)
    R.push_back(opts_.perfect_csi ? CMat::Zero(scn_.K(), scn_.K()) : lmmse_->error_covariance(i, psi));
  return R;
}

UatfInputs Evaluator::uatf_inputs(const CVec& psi) const {
  const int M = scn_.M();
  const int K = scn_.K();
  const int L = scn_.L();
  UatfInputs in;
  in.power = scn_.radio.power;
  in.sigma2 = scn_.radio.sigma2;
  for (int i = 0; i < M; ++i) {
    const double c2 = prior_.c(i) * prior_.c(i);
    const double direct = scn_.radio.direct_link ? std::pow(scn_.geometry.d(i), -scn_.radio.alpha1) : 0.0;
    CMat C = c2 * psi.squaredNorm() * prior_.B;
    C.diagonal().array() += direct;
    in.mean.push_back(unvec(prior_.mean[i], K, L) * psi);
    if (opts_.perfect_csi) {
      in.cov_hat.push_back(C);
    } else {
      in.cov_hat.push_back(hermitian_part(C - lmmse_->error_covariance(i, psi)));
    }
    in.cov.push_back(C);
  }
  in.cross.assign(M, std::vector<CMat>(M));
  const CMat& U = protocol_.upsilon;
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      if (i == j) {
        in.cross[i][j] = in.cov_hat[i];
        continue;
      }
      const CVec d = prior_.v[j].cwiseProduct(prior_.v[i].conjugate()).cwiseProduct(psi);
      const double scale = prior_.F1 * prior_.c(i) * prior_.c(j);
      if (opts_.perfect_csi) {
        // Cov(h_j, h_i) = F1 c_i c_j (psi^T D conj(psi)) I_K
        const cd s = (d.transpose() * psi.conjugate())(0, 0);
        in.cross[i][j] = scale * s * CMat::Identity(K, K);
      } else {
        const CVec y = U.adjoint() * d;  // y^T = psi^T D conj(Upsilon)
        in.cross[i][j] = scale * lmmse_->cross_term(i, y, psi);
      }
    }
  }
  return in;
}

std::vector<LinkTerms> Evaluator::link_terms(const CVec& psi) const {
  if (opts_.model == SinrModel::Uatf) return {uatf_link_terms(uatf_inputs(psi), opts_.uatf_mode)};
  const int M = scn_.M();
  const std::vector<CMat> R = error_covariances(psi);
  std::vector<LinkTerms> out(bank_->size());
  parallel_for(bank_->size(), opts_.threads, [&](int begin, int end) {
    std::vector<CVec> h_hat(M);
    for (int t = begin; t < end; ++t) {
      const TrialDraw& d = (*bank_)[t];
      for (int i = 0; i < M; ++i) h_hat[i] = d.q[i] + H_[t][i] * psi;
      out[t] = effective_link_terms(h_hat, h_hat, R, scn_.radio.power, scn_.radio.sigma2);
    }
  });
  return out;
}

std::function<double(cd)> Evaluator::psi_coordinate(const CVec& psi, Eigen::Index l,
                                                    const DecodingOrder& order) const {
  const auto prefix = order.sequence();
  if (opts_.model == SinrModel::Uatf) {
    return [this, psi, l, prefix](cd x) {
      CVec p = psi;
      p(l) = x;
      return truncated_mse(link_terms(p), prefix).mean;
    };
  }
  const int M = scn_.M();
  // h_hat(x) = base + H[:, l] x
  auto base = std::make_shared<std::vector<std::vector<CVec>>>(bank_->size());
  parallel_for(bank_->size(), opts_.threads, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      (*base)[t].resize(M);
      for (int i = 0; i < M; ++i)
        (*base)[t][i] = (*bank_)[t].q[i] + H_[t][i] * psi - H_[t][i].col(l) * psi(l);
    }
  });
  auto eps = std::make_shared<RVec>(prefix_mse(scn_.stats, prefix));
  return [this, psi, l, prefix, base, eps, M](cd x) {
    ++evaluations_;
    CVec p = psi;
    p(l) = x;
    const std::vector<CMat> R = error_covariances(p);
    std::vector<double> samples(bank_->size());
    parallel_for(bank_->size(), opts_.threads, [&](int begin, int end) {
      std::vector<CVec> h_hat(M);
      for (int t = begin; t < end; ++t) {
        for (int i = 0; i < M; ++i) h_hat[i] = (*base)[t][i] + H_[t][i].col(l) * x;
        samples[t] = trial_mse(effective_link_terms(h_hat, h_hat, R, scn_.radio.power, scn_.radio.sigma2),
                               prefix, *eps);
      }
    });
    return summarize(samples).mean;
  };
}

double Evaluator::trial_mse(const LinkTerms& t, const std::vector<int>& prefix, const RVec& eps) const {
  const int n_s = scn_.budget.n_s;
  const double rate = scn_.budget.rate;
  if (!opts_.sic) {
    const RVec rho = sinr_without_sic(t);
    RVec per(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i) per(i) = fbl_per(rho(i), n_s, rate);
    return no_sic_mse(scn_.stats, per, opts_.allowed_failures);
  }
  // sinr_along, fbl_per and the outcome tree fused; stops once no packet
  // can survive, since every later phi is then exactly zero.
  const int M = static_cast<int>(t.signal.size());
  const bool has_decoded = t.decoded.size() > 0;
  std::vector<char> done(M, 0);
  double survive = 1.0;
  double total = 0.0;
  for (std::size_t s = 0; s < prefix.size(); ++s) {
    const int i = prefix[s];
    done[i] = 1;
    double denom = t.floor(i);
    for (int j = 0; j < M; ++j) {
      if (done[j]) {
        if (has_decoded) denom += t.decoded(i, j);
      } else {
        denom += t.undecoded(i, j);
      }
    }
    const double rho = denom > 0.0 ? t.signal(i) / denom : (t.signal(i) > 0.0 ? INFINITY : 0.0);
    const double per = fbl_per(rho, n_s, rate);
    total += survive * per * eps(static_cast<Eigen::Index>(s));
    survive *= 1.0 - per;
    if (survive == 0.0) return total;
  }
  return total + survive * eps(static_cast<Eigen::Index>(prefix.size()));
}

MseEstimate Evaluator::truncated_mse(const std::vector<LinkTerms>& terms,
                                     const std::vector<int>& prefix) const {
  ++evaluations_;
  const RVec eps = prefix_mse(scn_.stats, prefix);
  std::vector<double> samples(terms.size());
  parallel_for(static_cast<int>(terms.size()), opts_.threads, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) samples[t] = trial_mse(terms[t], prefix, eps);
  });
  MseEstimate est = summarize(samples);
  if (opts_.model == SinrModel::Uatf) est.stderr = 0.0;
  return est;
}

MseEstimate Evaluator::mse(const std::vector<LinkTerms>& terms, const DecodingOrder& order) const {
  return truncated_mse(terms, order.sequence());
}

MseEstimate Evaluator::mse(const CVec& psi, const DecodingOrder& order) const {
  return mse(link_terms(psi), order);
}

RVec Evaluator::received_power(const std::vector<LinkTerms>& terms) const {
  RVec acc = RVec::Zero(scn_.M());
  if (terms.empty()) return acc;
  for (Eigen::Index i = 0; i < acc.size(); ++i) {
    std::vector<double> v(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) v[t] = terms[t].signal(i);
    acc(i) = pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
  }
  return acc;
}

MseEstimate average_mse_streaming(const Scenario& scn, const TrainingProtocol& protocol,
                                  const CVec& psi, const DecodingOrder& order, int trials,
                                  std::uint64_t seed, bool sic, int allowed_failures) {
  const int M = scn.M();
  const int K = scn.K();
  const int L = scn.L();
  const ArrayResponses arr = array_responses(scn);
  const CascadedPrior prior = cascaded_prior_moments(scn, arr);
  const PilotBook pilots = make_pilots(scn.radio.power, scn.budget.N);
  const RVec noise_var = training_noise_variance(scn);
  const CMat S = training_operator(protocol.upsilon, K);
  const CMat P = kron(CMat(psi.transpose()), CMat::Identity(K, K));
  std::vector<CsiEstimate> filters;
  std::vector<CMat> R;
  for (int i = 0; i < M; ++i) {
    filters.push_back(lmmse_filter(prior.mean[i], prior.covariance(i), S, noise_var(i)));
    R.push_back(P * filters.back().error_cov * P.adjoint());
  }
  const auto seq = order.sequence();
  const RVec eps = prefix_mse(scn.stats, seq);
  std::vector<double> samples(trials);
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    const ChannelRealization ch = draw_channels(scn, arr, rng);
    const Observation obs = simulate_training(ch, protocol, pilots, scn.radio.sigma2, rng);
    std::vector<CVec> h_hat;
    for (int i = 0; i < M; ++i) {
      const CVec g_hat = filters[i].A * obs.z[i] + filters[i].b;
      h_hat.push_back(effective_channel(ch.q[i], unvec(g_hat, K, L), psi));
    }
    const LinkTerms terms = effective_link_terms(h_hat, h_hat, R, scn.radio.power, scn.radio.sigma2);
    if (sic) {
      const RVec rho = sinr_along(terms, seq);
      RVec per(M);
      for (int s = 0; s < M; ++s) per(s) = fbl_per(rho(s), scn.budget.n_s, scn.budget.rate);
      samples[t] = conditional_total_mse(outcome_probabilities(per), eps);
    } else {
      const RVec rho = sinr_without_sic(terms);
      RVec per(M);
      for (int i = 0; i < M; ++i) per(i) = fbl_per(rho(i), scn.budget.n_s, scn.budget.rate);
      samples[t] = no_sic_mse(scn.stats, per, allowed_failures);
    }
  }
  return summarize(samples);
}

}  // namespace rismtc
