// SPDX-License-Identifier: Apache-2.0
#include "rismtc/channel.hpp"

#include <cmath>
#include <numbers>

namespace rismtc {

CVec linear_response(int elements, double spacing, double sin_angle) {
  CVec v(elements);
  for (int m = 0; m < elements; ++m)
    v(m) = std::polar(1.0, -2.0 * std::numbers::pi * spacing * m * sin_angle);
  return v;
}

CVec planar_response(int horizontal, int vertical, double spacing, const Direction& dir) {
  const CVec h = linear_response(horizontal, spacing, dir.horizontal);
  const CVec v = linear_response(vertical, spacing, dir.vertical);
  CVec out(horizontal * vertical);
  for (int a = 0; a < horizontal; ++a)
    for (int b = 0; b < vertical; ++b) out(a * vertical + b) = h(a) * v(b);
  return out;
}

std::pair<int, int> planar_shape(int L) {
  int best = 1;
  for (int a = 1; a * a <= L; ++a)
    if (L % a == 0) best = a;
  return {best, L / best};
}

ArrayResponses array_responses(const Scenario& scn) {
  const auto [vertical, horizontal] = planar_shape(scn.L());
  const double d = scn.radio.spacing;
  ArrayResponses arr;
  for (const auto& dir : scn.geometry.ris_arrival)
    arr.v_sensor.push_back(planar_response(horizontal, vertical, d, dir));
  arr.v_r = planar_response(horizontal, vertical, d, scn.geometry.ris_departure);
  arr.u_r = linear_response(scn.K(), d, scn.geometry.cn_arrival.horizontal);
  return arr;
}

CMat ChannelRealization::cascaded(int i) const { return G_R * g[i].asDiagonal(); }

CVec ChannelRealization::cascaded_vec(int i) const {
  const CMat G = cascaded(i);
  return Eigen::Map<const CVec>(G.data(), G.size());
}

std::vector<CVec> draw_direct_channel(const Scenario& scn, Rng& rng, std::vector<CVec>* chi) {
  std::vector<CVec> q;
  for (int i = 0; i < scn.M(); ++i) {
    CVec x = rng.complex_normal_vector(scn.K());
    const double scale = scn.radio.direct_link ? std::pow(scn.geometry.d(i), -scn.radio.alpha1 / 2) : 0.0;
    q.push_back(scale * x);
    if (chi) chi->push_back(std::move(x));
  }
  return q;
}

std::vector<CVec> draw_sensor_ris_channel(const Scenario& scn, const ArrayResponses& arr, Rng& rng,
                                          std::vector<CVec>* tau) {
  const double F1 = scn.radio.F1;
  const double nlos = std::sqrt(1.0 / (1.0 + F1));
  const double los = std::sqrt(F1 / (1.0 + F1));
  std::vector<CVec> g;
  for (int i = 0; i < scn.M(); ++i) {
    CVec t = rng.complex_normal_vector(scn.L());
    const double scale = std::pow(scn.geometry.delta(i), -scn.radio.alpha2 / 2);
    g.push_back(scale * (nlos * t + los * arr.v_sensor[i]));
    if (tau) tau->push_back(std::move(t));
  }
  return g;
}

CMat draw_ris_cn_channel(const Scenario& scn, const ArrayResponses& arr, Rng& rng, CMat* delta) {
  const double F2 = scn.radio.F2;
  CMat D = rng.complex_normal_matrix(scn.K(), scn.L());
  const double scale = std::pow(scn.geometry.delta_r, -scn.radio.alpha2 / 2);
  CMat G = scale * (std::sqrt(1.0 / (1.0 + F2)) * D +
                    std::sqrt(F2 / (1.0 + F2)) * arr.u_r * arr.v_r.adjoint());
  if (delta) *delta = std::move(D);
  return G;
}

ChannelRealization draw_channels(const Scenario& scn, const ArrayResponses& arr, Rng& rng) {
  ChannelRealization ch;
  ch.q = draw_direct_channel(scn, rng, &ch.chi);
  ch.g = draw_sensor_ris_channel(scn, arr, rng, &ch.tau);
  ch.G_R = draw_ris_cn_channel(scn, arr, rng, &ch.Delta);
  return ch;
}

CVec effective_channel(const CVec& q, const CMat& cascaded, const CVec& psi) {
  if (cascaded.cols() != psi.size() || cascaded.rows() != q.size())
    throw std::invalid_argument("effective_channel: dimension mismatch");
  return q + cascaded * psi;
}

}  // namespace rismtc
