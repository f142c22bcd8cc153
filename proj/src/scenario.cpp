// SPDX-License-Identifier: Apache-2.0
#include "rismtc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace rismtc {

double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace {

Direction planar_direction(const Vec3& from, const Vec3& to) {
  const Vec3 e = (to - from).normalized();
  return {e.x(), e.z()};
}

Direction linear_direction(const Vec3& from, const Vec3& to) {
  const Vec3 e = to - from;
  const double horizontal = std::hypot(e.x(), e.y());
  return {horizontal > 0.0 ? e.x() / horizontal : 0.0, 0.0};
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

std::vector<double> expand_fraction(const std::vector<double>& fraction, int M) {
  if (fraction.empty()) return std::vector<double>(M, 0.1);
  if (fraction.size() == 1) return std::vector<double>(M, fraction.front());
  if (static_cast<int>(fraction.size()) != M)
    throw ConfigError("noise fraction list must have one entry or one per sensor");
  return fraction;
}

std::string join(const RVec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out;
}

}  // namespace

Geometry make_geometry(const std::vector<Vec3>& sensors, const Vec3& ris, const Vec3& cn) {
  Geometry g;
  g.sensors = sensors;
  g.ris = ris;
  g.cn = cn;
  const int M = g.count();
  g.d.resize(M);
  g.delta.resize(M);
  g.ris_arrival.resize(M);
  g.delta_r = (ris - cn).norm();
  if (!(g.delta_r > 0.0)) throw ConfigError("RIS and CN positions coincide");
  for (int i = 0; i < M; ++i) {
    g.d(i) = (sensors[i] - cn).norm();
    g.delta(i) = (sensors[i] - ris).norm();
    if (!(g.d(i) > 0.0) || !(g.delta(i) > 0.0))
      throw ConfigError("sensor " + std::to_string(i + 1) + " coincides with the RIS or CN");
    g.ris_arrival[i] = planar_direction(ris, sensors[i]);
  }
  g.cn_arrival = linear_direction(cn, ris);
  g.ris_departure = planar_direction(ris, cn);
  return g;
}

Geometry default_layout(int sensors) {
  std::vector<Vec3> pos;
  for (int k = 0; k < sensors; ++k)
    pos.emplace_back(2.0 + 36.0 * halton(k + 1, 2), 2.0 + 27.0 * halton(k + 1, 3), 1.0);
  return make_geometry(pos, Vec3(20.0, 15.5, 3.0), Vec3(0.5, 0.5, 3.0));
}

bool budget_feasible(int M, int L, int G, int n_c) {
  return G >= 1 && G <= L && L % G == 0 && M * (L / G) <= n_c - 1;
}

std::vector<int> feasible_group_sizes(int M, int L, int n_c) {
  std::vector<int> out;
  for (int G = 1; G <= L; ++G)
    if (budget_feasible(M, L, G, n_c)) out.push_back(G);
  return out;
}

ResourceBudget make_budget(int M, int L, int G, int n_c, double spectral_efficiency) {
  if (G < 1 || G > L || L % G != 0) throw ConfigError("group size must divide L");
  ResourceBudget b;
  b.N = M;
  b.G = G;
  b.T = L / G;
  b.n_p = b.N * b.T;
  b.n_s = n_c - b.n_p;
  if (b.n_s < 1)
    throw ConfigError("coherence block too small: n_p = " + std::to_string(b.n_p) +
                      " leaves no data symbols");
  if (!(spectral_efficiency > 0.0)) throw ConfigError("spectral efficiency must be positive");
  b.bits = std::max(1, static_cast<int>(std::lround(spectral_efficiency * b.n_s)));
  b.rate = static_cast<double>(b.bits) / b.n_s;
  return b;
}

MeasurementSeries load_measurement_log(const std::filesystem::path& path,
                                       const std::vector<int>& sensor_ids) {
  if (sensor_ids.empty()) throw DataError("no sensor ids requested");
  std::ifstream in(path);
  if (!in) throw DataError("cannot read measurement log '" + path.string() + "'");

  std::map<int, std::map<long long, double>> readings;
  for (int id : sensor_ids) readings[id];
  std::map<int, bool> seen;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string date, time, epoch_text, mote_text, temperature_text;
    if (!(fields >> date >> time >> epoch_text >> mote_text)) continue;
    long long epoch;
    int mote;
    try {
      epoch = parse_int(epoch_text, "epoch");
      mote = static_cast<int>(parse_int(mote_text, "mote id"));
    } catch (const ConfigError&) {
      continue;
    }
    const auto slot = readings.find(mote);
    if (slot == readings.end()) continue;
    seen[mote] = true;
    if (!(fields >> temperature_text)) continue;
    double temperature;
    try {
      temperature = parse_double(temperature_text, "temperature");
    } catch (const ConfigError&) {
      continue;
    }
    if (!std::isfinite(temperature)) continue;
    slot->second.emplace(epoch, temperature);
  }
  for (int id : sensor_ids)
    if (!seen[id]) throw DataError("unknown sensor id " + std::to_string(id));

  MeasurementSeries series;
  series.ids = sensor_ids;
  for (const auto& [epoch, value] : readings[sensor_ids.front()]) {
    bool common = true;
    for (int id : sensor_ids) common = common && readings[id].count(epoch) > 0;
    if (common) series.epochs.push_back(epoch);
  }
  if (series.epochs.size() < 2)
    throw DataError("fewer than 2 aligned epochs across the requested sensors");
  series.values.resize(static_cast<Eigen::Index>(series.epochs.size()),
                       static_cast<Eigen::Index>(sensor_ids.size()));
  for (std::size_t e = 0; e < series.epochs.size(); ++e)
    for (std::size_t s = 0; s < sensor_ids.size(); ++s)
      series.values(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(s)) =
          readings[sensor_ids[s]][series.epochs[e]];
  return series;
}

ParameterStatistics estimate_parameter_statistics(const MeasurementSeries& series,
                                                  const std::vector<double>& noise_fraction) {
  const RMat& X = series.values;
  if (X.rows() < 2) throw DataError("need at least 2 samples per series");
  const int M = static_cast<int>(X.cols());
  ParameterStatistics stats;
  stats.mean = X.colwise().mean().transpose();
  const RMat centered = X.rowwise() - stats.mean.transpose();
  RMat C = centered.transpose() * centered / static_cast<double>(X.rows() - 1);
  C = (0.5 * (C + C.transpose())).eval();
  if (!C.allFinite()) throw DataError("parameter covariance is not finite");
  if (C.diagonal().maxCoeff() <= 0.0) throw DataError("all series are constant (rank-0 data)");
  for (int i = 0; i < M; ++i)
    if (!(C(i, i) > 0.0))
      throw DataError("series for sensor id " + std::to_string(series.ids[i]) + " is constant");
  stats.C_theta = C;
  const auto fraction = expand_fraction(noise_fraction, M);
  stats.C_eta = RMat::Zero(M, M);
  for (int i = 0; i < M; ++i) {
    if (fraction[i] < 0.0) throw ConfigError("noise fraction must be nonnegative");
    stats.C_eta(i, i) = fraction[i] * C(i, i);
  }
  return stats;
}

ParameterStatistics spatial_statistics(const std::vector<Vec3>& positions, double variance,
                                       double length, double mean,
                                       const std::vector<double>& noise_fraction) {
  if (!(variance > 0.0) || !(length > 0.0))
    throw ConfigError("spatial statistics need positive variance and correlation length");
  const int M = static_cast<int>(positions.size());
  ParameterStatistics stats;
  stats.mean = RVec::Constant(M, mean);
  stats.C_theta.resize(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      stats.C_theta(i, j) = variance * std::exp(-(positions[i] - positions[j]).norm() / length);
  const auto fraction = expand_fraction(noise_fraction, M);
  stats.C_eta = RMat::Zero(M, M);
  for (int i = 0; i < M; ++i) {
    if (fraction[i] < 0.0) throw ConfigError("noise fraction must be nonnegative");
    stats.C_eta(i, i) = fraction[i] * variance;
  }
  return stats;
}

Scenario Scenario::with_group_size(int G) const {
  Scenario out = *this;
  out.budget = make_budget(radio.M, radio.L, G, radio.n_c, radio.spectral_efficiency);
  return out;
}

void Scenario::validate() const {
  const int M = radio.M;
  if (M < 1) throw ConfigError("need at least one sensor");
  if (radio.K < 1) throw ConfigError("need at least one CN antenna");
  if (radio.L < 1) throw ConfigError("need at least one RIS element");
  if (geometry.count() != M) throw ConfigError("sensor count does not match geometry");
  if (radio.power.size() != M) throw ConfigError("transmit power list does not match M");
  if ((radio.power.array() < 0.0).any()) throw ConfigError("transmit powers must be nonnegative");
  if (!(radio.sigma2 > 0.0)) throw ConfigError("noise power must be positive");
  if (!(radio.alpha1 > 0.0) || !(radio.alpha2 > 0.0))
    throw ConfigError("path-loss exponents must be positive");
  if (radio.F1 < 0.0 || radio.F2 < 0.0) throw ConfigError("Rician factors must be nonnegative");
  if (!(radio.spacing > 0.0)) throw ConfigError("element spacing must be positive");
  if (radio.n_c < 2 * M) throw ConfigError("coherence block n_c must be at least 2M");
  if (budget.n_p + budget.n_s != radio.n_c) throw ConfigError("n_p + n_s must equal n_c");
  if (budget.N < M) throw ConfigError("pilot length must be at least M");
  if (stats.size() != M || stats.C_theta.rows() != M || stats.C_theta.cols() != M ||
      stats.C_eta.rows() != M || stats.C_eta.cols() != M)
    throw ConfigError("statistics dimension does not match M");
  if ((stats.C_theta - stats.C_theta.transpose()).norm() > 1e-9 * (1.0 + stats.C_theta.norm()))
    throw ConfigError("parameter covariance must be symmetric");
  const RVec eig = Eigen::SelfAdjointEigenSolver<RMat>(stats.C_theta).eigenvalues();
  if (eig.minCoeff() < -1e-10 * std::max(1.0, stats.C_theta.trace()))
    throw ConfigError("parameter covariance must be positive semidefinite");
  if (!(stats.C_theta.trace() > 0.0)) throw ConfigError("parameter covariance has zero trace");
  const RMat off = stats.C_eta - RMat(stats.C_eta.diagonal().asDiagonal());
  if (off.norm() > 0.0) throw ConfigError("measurement-noise covariance must be diagonal");
  if ((stats.C_eta.diagonal().array() < 0.0).any())
    throw ConfigError("measurement-noise variances must be nonnegative");
}

namespace {

Vec3 read_point(const Config& cfg, const std::string& key, const Vec3& fallback) {
  const auto v = cfg.get_doubles("geometry", key);
  if (v.empty()) return fallback;
  if (v.size() == 2) return {v[0], v[1], fallback.z()};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw ConfigError("geometry." + key + ": expected 2 or 3 coordinates");
}

}  // namespace

Scenario build_scenario(const Config& cfg) {
  Scenario scn;

  // Sensor count: explicit positions, explicit statistics and geometry.count
  // must agree with each other when given together.
  const RMat positions = cfg.get_matrix("geometry", "sensors");
  const std::string source_key = cfg.get_string("statistics", "source", "");
  const RMat covariance = cfg.get_matrix("statistics", "covariance");
  std::vector<int> counts;
  if (positions.size() > 0) counts.push_back(static_cast<int>(positions.rows()));
  if (covariance.size() > 0) counts.push_back(static_cast<int>(covariance.rows()));
  if (cfg.has("geometry", "count")) counts.push_back(static_cast<int>(cfg.get_int("geometry", "count", 0)));
  const auto motes = cfg.get_doubles("statistics", "motes");
  if (!motes.empty()) counts.push_back(static_cast<int>(motes.size()));
  const int M = counts.empty() ? 20 : counts.front();
  for (int c : counts)
    if (c != M) throw ConfigError("inconsistent sensor count M across geometry/statistics");
  if (M < 1) throw ConfigError("need at least one sensor");

  if (positions.size() > 0) {
    if (positions.cols() != 2 && positions.cols() != 3)
      throw ConfigError("geometry.sensors: rows must have 2 or 3 coordinates");
    std::vector<Vec3> pos;
    for (Eigen::Index r = 0; r < positions.rows(); ++r)
      pos.emplace_back(positions(r, 0), positions(r, 1), positions.cols() == 3 ? positions(r, 2) : 1.0);
    scn.geometry = make_geometry(pos, read_point(cfg, "ris", Vec3(20.0, 15.5, 3.0)),
                                 read_point(cfg, "cn", Vec3(0.5, 0.5, 3.0)));
  } else {
    const Geometry layout = default_layout(M);
    scn.geometry = make_geometry(layout.sensors, read_point(cfg, "ris", layout.ris),
                                 read_point(cfg, "cn", layout.cn));
  }

  RadioConfig& r = scn.radio;
  r.M = M;
  r.K = static_cast<int>(cfg.get_int("radio", "antennas", 10));
  r.L = static_cast<int>(cfg.get_int("radio", "ris_elements", 50));
  const auto power_dbm = cfg.get_doubles("radio", "tx_power_dbm");
  r.power.resize(M);
  if (power_dbm.empty()) {
    r.power.setConstant(dbm_to_watt(0.0));
  } else if (power_dbm.size() == 1) {
    r.power.setConstant(dbm_to_watt(power_dbm.front()));
  } else if (static_cast<int>(power_dbm.size()) == M) {
    for (int i = 0; i < M; ++i) r.power(i) = dbm_to_watt(power_dbm[i]);
  } else {
    throw ConfigError("radio.tx_power_dbm: need one value or one per sensor");
  }
  r.noise_psd = dbm_to_watt(cfg.get_double("radio", "noise_psd_dbm_hz", -174.0));
  r.bandwidth = cfg.get_double("radio", "bandwidth_hz", 180e3);
  r.sigma2 = r.noise_psd * r.bandwidth;
  r.carrier = cfg.get_double("radio", "carrier_hz", 3e9);
  r.alpha1 = cfg.get_double("radio", "alpha1", 3.8);
  r.alpha2 = cfg.get_double("radio", "alpha2", 2.2);
  r.F1 = db_to_linear(cfg.get_double("radio", "rician_f1_db", 3.0));
  r.F2 = db_to_linear(cfg.get_double("radio", "rician_f2_db", 10.0));
  if (cfg.has("radio", "rician_f1")) r.F1 = cfg.get_double("radio", "rician_f1", r.F1);
  if (cfg.has("radio", "rician_f2")) r.F2 = cfg.get_double("radio", "rician_f2", r.F2);
  r.spacing = cfg.get_double("radio", "spacing_wavelengths", 0.5);
  r.direct_link = cfg.get_bool("radio", "direct_link", true);
  r.subcarrier_spacing = cfg.get_double("radio", "subcarrier_spacing_hz", 15e3);
  r.symbol_duration = cfg.get_double("radio", "symbol_duration_s", 71.4e-6);
  r.coherence_bandwidth = cfg.get_double("radio", "coherence_bandwidth_hz", 200e3);

  r.n_c = static_cast<int>(cfg.get_int("budget", "coherence_symbols", 100));
  r.spectral_efficiency = cfg.get_double("budget", "spectral_efficiency", 0.5);
  if (r.n_c < 2 * M) throw ConfigError("coherence block n_c must be at least 2M");
  const std::string group = cfg.get_string("budget", "group_size", "auto");
  int G = 0;
  if (group == "auto") {
    const auto feasible = feasible_group_sizes(M, r.L, r.n_c);
    if (feasible.empty()) throw ConfigError("coherence block too small for any group size");
    G = feasible.front();
  } else {
    G = static_cast<int>(parse_int(group, "budget.group_size"));
  }
  scn.budget = make_budget(M, r.L, G, r.n_c, r.spectral_efficiency);

  const auto fraction = cfg.get_doubles("statistics", "noise_fraction");
  std::string source = source_key;
  if (source.empty()) {
    if (covariance.size() > 0) source = "explicit";
    else if (cfg.has("statistics", "log")) source = "log";
    else source = "spatial";
  }
  if (source == "explicit") {
    if (covariance.size() == 0) throw ConfigError("statistics.covariance missing");
    if (covariance.rows() != covariance.cols())
      throw ConfigError("statistics.covariance must be square");
    auto& s = scn.stats;
    s.C_theta = covariance;
    const auto mean = cfg.get_doubles("statistics", "mean");
    s.mean = RVec::Zero(M);
    if (!mean.empty()) {
      if (static_cast<int>(mean.size()) != M) throw ConfigError("statistics.mean must have M entries");
      for (int i = 0; i < M; ++i) s.mean(i) = mean[i];
    }
    const auto noise = cfg.get_doubles("statistics", "noise");
    s.C_eta = RMat::Zero(M, M);
    if (!noise.empty()) {
      if (static_cast<int>(noise.size()) != M) throw ConfigError("statistics.noise must have M entries");
      for (int i = 0; i < M; ++i) s.C_eta(i, i) = noise[i];
    } else {
      const auto f = expand_fraction(fraction, M);
      for (int i = 0; i < M; ++i) s.C_eta(i, i) = f[i] * covariance(i, i);
    }
  } else if (source == "log") {
    const std::string log = cfg.get_string("statistics", "log", "");
    if (log.empty()) throw ConfigError("statistics.log missing");
    if (motes.empty()) throw ConfigError("statistics.motes missing");
    std::vector<int> ids;
    for (double m : motes) ids.push_back(static_cast<int>(m));
    std::filesystem::path path(log);
    if (path.is_relative() && cfg.origin() != "<string>")
      path = std::filesystem::path(cfg.origin()).parent_path() / path;
    scn.stats = estimate_parameter_statistics(load_measurement_log(path, ids), fraction);
  } else if (source == "spatial") {
    scn.stats = spatial_statistics(scn.geometry.sensors,
                                   cfg.get_double("statistics", "variance", 4.0),
                                   cfg.get_double("statistics", "correlation_length_m", 15.0),
                                   cfg.get_double("statistics", "mean_value", 20.0), fraction);
  } else {
    throw ConfigError("statistics.source must be spatial, explicit or log");
  }
  scn.validate();
  return scn;
}

std::string statistics_section(const ParameterStatistics& stats) {
  std::ostringstream out;
  out << "[statistics]\n";
  out << "source = explicit\n";
  out << "mean = " << join(stats.mean) << '\n';
  out << "covariance = ";
  for (Eigen::Index i = 0; i < stats.C_theta.rows(); ++i) {
    if (i) out << "; ";
    out << join(stats.C_theta.row(i).transpose());
  }
  out << '\n';
  out << "noise = " << join(stats.C_eta.diagonal()) << '\n';
  return out.str();
}

}  // namespace rismtc
