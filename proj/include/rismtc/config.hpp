// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rismtc/types.hpp"

namespace rismtc {

// Sectioned key-value configuration:
//
//   # comment
//   [radio]
//   antennas = 4
//   tx_power_dbm = 0, 3, -2       # arrays are comma-separated
//   [statistics]
//   covariance = 1, 0.5; 0.5, 1   # matrix rows are separated by ';'
//
// Every getter marks the key as consumed so unused_keys() can report typos.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, const std::string& value);
  void erase(const std::string& section, const std::string& key);

  std::optional<std::string> raw(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& section, const std::string& key) const;
  RMat get_matrix(const std::string& section, const std::string& key) const;

  // "section.key" for every entry never read through a getter.
  std::vector<std::string> unused_keys() const;

  std::string to_string() const;
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> entries_;
  mutable std::set<std::string> consumed_;
  std::string origin_;
};

double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
std::vector<std::string> split(const std::string& text, char delimiter);
std::string trim(const std::string& text);

// Formats with 17 significant digits (lossless round-trip).
std::string format_double(double value);

}  // namespace rismtc
