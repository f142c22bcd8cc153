// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "rismtc/rng.hpp"
#include "rismtc/scenario.hpp"
#include "rismtc/types.hpp"

namespace rismtc {

// Entry m (0-based) is exp(-j 2 pi spacing m sin_angle).
CVec linear_response(int elements, double spacing, double sin_angle);

// Separable planar response, horizontal index major.
CVec planar_response(int horizontal, int vertical, double spacing, const Direction& dir);

// Most-square factorization of L, returned as (vertical, horizontal) with
// vertical <= horizontal (50 -> 5 x 10).
std::pair<int, int> planar_shape(int L);

struct ArrayResponses {
  std::vector<CVec> v_sensor;  // v(theta_i), length L
  CVec v_r;                    // v(theta_R2), departure at the RIS
  CVec u_r;                    // u(theta_R1), arrival at the CN
};

ArrayResponses array_responses(const Scenario& scn);

struct ChannelRealization {
  std::vector<CVec> q;    // K, direct
  std::vector<CVec> g;    // L, sensor -> RIS
  CMat G_R;               // K x L
  std::vector<CVec> chi;  // underlying NLoS draws
  std::vector<CVec> tau;
  CMat Delta;

  CMat cascaded(int i) const;      // G_R diag(g_i)
  CVec cascaded_vec(int i) const;  // vec(G_C,i), column-major
};

// Draws chi for every sensor (direct links off -> q_i = 0 but draws still made).
std::vector<CVec> draw_direct_channel(const Scenario& scn, Rng& rng, std::vector<CVec>* chi = nullptr);
std::vector<CVec> draw_sensor_ris_channel(const Scenario& scn, const ArrayResponses& arr, Rng& rng,
                                          std::vector<CVec>* tau = nullptr);
CMat draw_ris_cn_channel(const Scenario& scn, const ArrayResponses& arr, Rng& rng,
                         CMat* delta = nullptr);

// chi (M x K), then tau (M x L), then Delta (K x L).
ChannelRealization draw_channels(const Scenario& scn, const ArrayResponses& arr, Rng& rng);

CVec effective_channel(const CVec& q, const CMat& cascaded, const CVec& psi);

}  // namespace rismtc
