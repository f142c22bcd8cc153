// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rismtc/config.hpp"
#include "rismtc/types.hpp"

namespace rismtc {

// Arrival/departure direction seen from an array. For the planar RIS both
// direction cosines are used; the linear CN array only uses `horizontal`.
struct Direction {
  double horizontal = 0.0;  // sine of the angle along the array's first axis
  double vertical = 0.0;    // sine of the angle along the second axis
};

struct Geometry {
  std::vector<Vec3> sensors;
  Vec3 ris = Vec3::Zero();
  Vec3 cn = Vec3::Zero();

  RVec d;       // sensor -> CN
  RVec delta;   // sensor -> RIS
  double delta_r = 0.0;  // RIS -> CN

  std::vector<Direction> ris_arrival;  // per sensor, at the RIS
  Direction cn_arrival;                // RIS -> CN, at the CN
  Direction ris_departure;             // RIS -> CN, at the RIS

  int count() const { return static_cast<int>(sensors.size()); }
};

// RIS panel axes are x (horizontal) and z (vertical) with the normal along y;
// the CN array lies along x.
Geometry make_geometry(const std::vector<Vec3>& sensors, const Vec3& ris, const Vec3& cn);

// Laboratory-like floor plan: 40 m x 31 m room, RIS near the centre, CN in a
// corner and sensors on a low-discrepancy (Halton) pattern.
Geometry default_layout(int sensors);

struct RadioConfig {
  int M = 20;
  int K = 10;
  int L = 50;
  RVec power;                     // W, per sensor
  double noise_psd = 0.0;         // W/Hz
  double bandwidth = 180e3;       // Hz
  double sigma2 = 0.0;            // W
  double carrier = 3e9;           // Hz
  double alpha1 = 3.8;
  double alpha2 = 2.2;
  double F1 = 0.0;                // linear
  double F2 = 0.0;                // linear
  double spacing = 0.5;           // wavelengths, both arrays
  bool direct_link = true;
  int n_c = 100;
  double subcarrier_spacing = 15e3;
  double symbol_duration = 71.4e-6;
  double coherence_bandwidth = 200e3;
  double spectral_efficiency = 0.5;  // bit/symbol target for R_i
};

struct ResourceBudget {
  int N = 0;    // pilot length
  int T = 0;    // training periods
  int G = 0;    // group size
  int n_p = 0;
  int n_s = 0;
  int bits = 0;     // l_i
  double rate = 0;  // R_i = l_i / n_s
};

// Throws ConfigError naming the violated invariant.
ResourceBudget make_budget(int M, int L, int G, int n_c, double spectral_efficiency);
bool budget_feasible(int M, int L, int G, int n_c);
std::vector<int> feasible_group_sizes(int M, int L, int n_c);

struct ParameterStatistics {
  RVec mean;
  RMat C_theta;
  RMat C_eta;  // diagonal
  int size() const { return static_cast<int>(mean.size()); }
};

struct MeasurementSeries {
  std::vector<int> ids;
  std::vector<long long> epochs;
  RMat values;  // epochs x sensors
};

MeasurementSeries load_measurement_log(const std::filesystem::path& path,
                                       const std::vector<int>& sensor_ids);

// Noise fractions: one value for all sensors or one per sensor.
ParameterStatistics estimate_parameter_statistics(const MeasurementSeries& series,
                                                  const std::vector<double>& noise_fraction);

// Exponentially-correlated field over the sensor positions.
ParameterStatistics spatial_statistics(const std::vector<Vec3>& positions, double variance,
                                       double length, double mean,
                                       const std::vector<double>& noise_fraction);

struct Scenario {
  Geometry geometry;
  RadioConfig radio;
  ResourceBudget budget;
  ParameterStatistics stats;

  int M() const { return radio.M; }
  int K() const { return radio.K; }
  int L() const { return radio.L; }

  // Same world with a different grouping (T, n_p, n_s, l_i re-derived).
  Scenario with_group_size(int G) const;
  void validate() const;
};

Scenario build_scenario(const Config& config);

// Explicit-statistics section that build_scenario reads back.
std::string statistics_section(const ParameterStatistics& stats);

double dbm_to_watt(double dbm);
double db_to_linear(double db);

}  // namespace rismtc
