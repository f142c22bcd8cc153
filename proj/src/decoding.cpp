// SPDX-License-Identifier: Apache-2.0
#include "rismtc/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "rismtc/linalg.hpp"

namespace rismtc {

DecodingOrder DecodingOrder::identity(int M) {
  DecodingOrder o;
  o.steps_.resize(M);
  for (int i = 0; i < M; ++i) o.steps_[i] = i;
  return o;
}

DecodingOrder DecodingOrder::from_steps(std::vector<int> steps) {
  if (!is_permutation(steps)) throw std::invalid_argument("decoding order is not a permutation");
  DecodingOrder o;
  o.steps_ = std::move(steps);
  return o;
}

DecodingOrder DecodingOrder::from_sequence(const std::vector<int>& sequence) {
  if (!is_permutation(sequence)) throw std::invalid_argument("decoding sequence is not a permutation");
  std::vector<int> steps(sequence.size());
  for (std::size_t s = 0; s < sequence.size(); ++s) steps[sequence[s]] = static_cast<int>(s);
  return from_steps(std::move(steps));
}

std::vector<int> DecodingOrder::sequence() const {
  std::vector<int> seq(steps_.size());
  for (std::size_t i = 0; i < steps_.size(); ++i) seq[steps_[i]] = static_cast<int>(i);
  return seq;
}

void DecodingOrder::swap_steps(int a, int b) {
  if (a == b) return;
  int sa = -1, sb = -1;
  for (int i = 0; i < size(); ++i) {
    if (steps_[i] == a) sa = i;
    if (steps_[i] == b) sb = i;
  }
  std::swap(steps_[sa], steps_[sb]);
}

std::string DecodingOrder::to_string() const {
  std::string out = "[";
  for (int i = 0; i < size(); ++i) {
    if (i) out += ",";
    out += std::to_string(steps_[i] + 1);
  }
  return out + "]";
}

bool is_permutation(const std::vector<int>& values) {
  std::vector<bool> seen(values.size(), false);
  for (int v : values) {
    if (v < 0 || v >= static_cast<int>(values.size()) || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

double kappa(const CMat& error_cov, const CVec& psi, const CVec& f) {
  const CMat a = kron(CMat(psi.conjugate()), CMat(f));
  return std::max(0.0, (a.adjoint() * error_cov * a)(0, 0).real());
}

double kappa_projected(const CMat& R, const CVec& f) {
  return std::max(0.0, f.dot(R * f).real());
}

LinkTerms effective_link_terms(const std::vector<CVec>& filters, const std::vector<CVec>& h_hat,
                               const std::vector<CMat>& R, const RVec& power, double sigma2) {
  const int M = static_cast<int>(h_hat.size());
  LinkTerms t;
  t.signal.resize(M);
  t.floor.resize(M);
  t.undecoded.resize(M, M);
  // sum_j P_j f^H R_j f = f^H (sum_j P_j R_j) f
  CMat Rsum = CMat::Zero(R.empty() ? 0 : R[0].rows(), R.empty() ? 0 : R[0].cols());
  for (int j = 0; j < M; ++j) Rsum += power(j) * R[j];
  for (int i = 0; i < M; ++i) {
    const CVec& f = filters[i];
    const double fn = f.squaredNorm();
    if (!(fn > 0.0)) throw std::runtime_error("zero-norm receive filter for sensor " + std::to_string(i + 1));
    t.signal(i) = power(i) * std::norm(f.dot(h_hat[i]));
    for (int j = 0; j < M; ++j) t.undecoded(i, j) = power(j) * std::norm(f.dot(h_hat[j]));
    t.floor(i) = sigma2 * fn + kappa_projected(Rsum, f);
  }
  return t;
}

RVec sinr_along(const LinkTerms& terms, const std::vector<int>& prefix) {
  const int M = static_cast<int>(terms.signal.size());
  const bool has_decoded = terms.decoded.size() > 0;
  std::vector<char> done(M, 0);
  // Interference from everyone not yet decoded, updated as the prefix advances.
  RVec out(prefix.size());
  for (std::size_t s = 0; s < prefix.size(); ++s) {
    const int i = prefix[s];
    done[i] = 1;
    double denom = terms.floor(i);
    for (int j = 0; j < M; ++j) {
      if (done[j]) {
        if (has_decoded) denom += terms.decoded(i, j);
      } else {
        denom += terms.undecoded(i, j);
      }
    }
    out(static_cast<Eigen::Index>(s)) = denom > 0.0 ? terms.signal(i) / denom
                                                    : (terms.signal(i) > 0.0 ? INFINITY : 0.0);
  }
  return out;
}

RVec sinr_for_order(const LinkTerms& terms, const DecodingOrder& order) {
  const auto seq = order.sequence();
  const RVec along = sinr_along(terms, seq);
  RVec out(order.size());
  for (std::size_t s = 0; s < seq.size(); ++s) out(seq[s]) = along(static_cast<Eigen::Index>(s));
  return out;
}

RVec sinr_without_sic(const LinkTerms& terms) {
  const int M = static_cast<int>(terms.signal.size());
  const bool has_decoded = terms.decoded.size() > 0;
  RVec out(M);
  for (int i = 0; i < M; ++i) {
    double denom = terms.floor(i) + (has_decoded ? terms.decoded(i, i) : 0.0);
    for (int j = 0; j < M; ++j)
      if (j != i) denom += terms.undecoded(i, j);
    out(i) = denom > 0.0 ? terms.signal(i) / denom : (terms.signal(i) > 0.0 ? INFINITY : 0.0);
  }
  return out;
}

RVec effective_sinr_decomposed(const std::vector<CVec>& filters, const std::vector<CVec>& h_hat,
                               const std::vector<CMat>& error_cov, const CVec& psi,
                               const RVec& power, double sigma2, const DecodingOrder& order) {
  const int M = order.size();
  RVec out(M);
  for (int i = 0; i < M; ++i) {
    const CVec& f = filters[i];
    const double desired = power(i) * std::norm(f.dot(h_hat[i]));
    const double est_noise = power(i) * kappa(error_cov[i], psi, f);
    double eff_noise = 0.0;
    for (int j = 0; j < M; ++j) {
      if (order.step(j) < order.step(i))
        eff_noise += power(j) * kappa(error_cov[j], psi, f);
      else if (order.step(j) > order.step(i))
        eff_noise += power(j) * (std::norm(f.dot(h_hat[j])) + kappa(error_cov[j], psi, f));
    }
    out(i) = desired / (est_noise + eff_noise + sigma2 * f.squaredNorm());
  }
  return out;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double fbl_per(double rho, int n_s, double rate) {
  if (!(rho > 0.0)) return 1.0;
  if (std::isinf(rho)) return 0.0;
  const double capacity = std::log2(1.0 + rho);
  const double log2e = std::numbers::log2e;
  const double dispersion = (1.0 - 1.0 / ((1.0 + rho) * (1.0 + rho))) * log2e * log2e;
  if (!(dispersion > 0.0)) return capacity > rate ? 0.0 : 1.0;
  const double x = std::sqrt(static_cast<double>(n_s)) * (capacity - rate) / std::sqrt(dispersion);
  return std::clamp(q_function(x), 0.0, 1.0);
}

PerBounds per_bounds(const RVec& conditional_per) {
  const Eigen::Index n = conditional_per.size();
  PerBounds b{RVec(n), RVec(n)};
  for (Eigen::Index s = 0; s < n; ++s) {
    const double c = conditional_per(s);
    b.lower(s) = s == 0 ? c : std::max(c, b.lower(s - 1));
    b.upper(s) = s == 0 ? c : std::min(1.0, c + b.upper(s - 1));
  }
  return b;
}

RVec outcome_probabilities(const RVec& per_along_order) {
  const Eigen::Index n = per_along_order.size();
  RVec phi(n + 1);
  double survive = 1.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    // phi_s: the first s decode and step s fails.
    phi(s) = survive * per_along_order(s);
    survive *= 1.0 - per_along_order(s);
  }
  phi(n) = survive;
  return phi;
}

double conditional_mse(const ParameterStatistics& stats, const std::vector<int>& decoded) {
  const RMat& Ct = stats.C_theta;
  const double prior = Ct.trace();
  if (decoded.empty()) return prior;
  const Eigen::Index n = static_cast<Eigen::Index>(decoded.size());
  RMat cross(Ct.rows(), n);
  RMat inner(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    cross.col(a) = Ct.col(decoded[a]);
    for (Eigen::Index b = 0; b < n; ++b)
      inner(a, b) = Ct(decoded[a], decoded[b]) + stats.C_eta(decoded[a], decoded[b]);
  }
  Eigen::LDLT<RMat> ldlt(inner);
  double reduction;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
      ldlt.vectorD().minCoeff() > 1e-12 * ldlt.vectorD().cwiseAbs().maxCoeff()) {
    reduction = (cross.transpose().array() * ldlt.solve(cross.transpose()).array()).sum();
  } else {
    reduction = (cross * symmetric_pinv(inner) * cross.transpose()).trace();
  }
  return prior - reduction;
}

RVec prefix_mse(const ParameterStatistics& stats, const std::vector<int>& sequence) {
  RVec eps(sequence.size() + 1);
  std::vector<int> decoded;
  eps(0) = stats.C_theta.trace();
  for (std::size_t s = 0; s < sequence.size(); ++s) {
    decoded.push_back(sequence[s]);
    eps(static_cast<Eigen::Index>(s + 1)) = conditional_mse(stats, decoded);
  }
  return eps;
}

double conditional_total_mse(const RVec& phi, const RVec& eps) { return phi.dot(eps); }

double nmse(double eps, const RMat& C_theta) {
  const double tr = C_theta.trace();
  if (!(tr > 0.0)) throw std::invalid_argument("nmse: prior covariance has zero trace");
  return eps / tr;
}

double no_sic_mse(const ParameterStatistics& stats, const RVec& per, int allowed_failures) {
  const int M = static_cast<int>(per.size());
  const int limit = std::min(std::max(allowed_failures, 0), M);
  double covered = 0.0;
  double total = 0.0;
  std::vector<int> failed;
  std::function<void(int)> visit = [&](int start) {
    double prob = 1.0;
    std::vector<int> decoded;
    std::size_t f = 0;
    for (int i = 0; i < M; ++i) {
      if (f < failed.size() && failed[f] == i) {
        prob *= per(i);
        ++f;
      } else {
        prob *= 1.0 - per(i);
        decoded.push_back(i);
      }
    }
    if (prob > 0.0) total += prob * conditional_mse(stats, decoded);
    covered += prob;
    if (static_cast<int>(failed.size()) == limit) return;
    for (int i = start; i < M; ++i) {
      failed.push_back(i);
      visit(i + 1);
      failed.pop_back();
    }
  };
  visit(0);
  return total + std::max(0.0, 1.0 - covered) * stats.C_theta.trace();
}

LinkTerms uatf_link_terms(const UatfInputs& in, UatfMode mode) {
  const int M = static_cast<int>(in.mean.size());
  const double factor = mode == UatfMode::Bound ? 2.0 : 1.0;
  LinkTerms t;
  t.signal.resize(M);
  t.floor.resize(M);
  t.decoded.resize(M, M);
  t.undecoded.resize(M, M);
  for (int i = 0; i < M; ++i) {
    const CVec& mi = in.mean[i];
    const CMat& Ch = in.cov_hat[i];
    t.floor(i) = in.sigma2 * (Ch.trace().real() + mi.squaredNorm());
    for (int j = 0; j < M; ++j) {
      const CVec& mj = in.mean[j];
      const cd trX = in.cross[i][j].trace();
      const cd mm = mi.dot(mj);
      const cd first = trX + mm;
      const double second =
          factor * ((Ch * in.cov[j]).trace().real() + std::norm(trX) + std::norm(mm) +
                    2.0 * (trX * std::conj(mm)).real() + mj.dot(Ch * mj).real() +
                    mi.dot(in.cov[j] * mi).real());
      if (i == j) t.signal(i) = in.power(i) * std::norm(first);
      t.decoded(i, j) = in.power(j) * std::max(0.0, second - std::norm(first));
      t.undecoded(i, j) = in.power(j) * second;
    }
  }
  return t;
}

}  // namespace rismtc
