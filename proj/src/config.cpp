// SPDX-License-Identifier: Apache-2.0
#include "rismtc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rismtc {

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& text, char delimiter) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream stream(text);
  while (std::getline(stream, current, delimiter)) parts.push_back(trim(current));
  if (!text.empty() && text.back() == delimiter) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(what + ": empty value");
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError(what + ": not a number '" + t + "'");
  return value;
}

long long parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(what + ": empty value");
  char* end = nullptr;
  errno = 0;
  const long long value = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError(what + ": not an integer '" + t + "'");
  return value;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config config;
  config.origin_ = origin;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_number);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      config.entries_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    auto& bucket = config.entries_[section];
    if (bucket.count(key)) throw ConfigError(where + ": duplicate key '" + section + "." + key + "'");
    bucket[key] = trim(line.substr(eq + 1));
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = entries_.find(section);
  return s != entries_.end() && s->second.count(key) > 0;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  entries_[section][key] = value;
}

void Config::erase(const std::string& section, const std::string& key) {
  const auto s = entries_.find(section);
  if (s != entries_.end()) s->second.erase(key);
}

std::optional<std::string> Config::raw(const std::string& section, const std::string& key) const {
  const auto s = entries_.find(section);
  if (s == entries_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  consumed_.insert(section + "." + key);
  return k->second;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return raw(section, key).value_or(fallback);
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const auto value = raw(section, key);
  return value ? parse_double(*value, section + "." + key) : fallback;
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
  const auto value = raw(section, key);
  return value ? parse_int(*value, section + "." + key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto value = raw(section, key);
  if (!value) return fallback;
  std::string v = *value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(section + "." + key + ": not a boolean '" + *value + "'");
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key) const {
  const auto value = raw(section, key);
  std::vector<double> out;
  if (!value || trim(*value).empty()) return out;
  for (const auto& part : split(*value, ',')) out.push_back(parse_double(part, section + "." + key));
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& section,
                                             const std::string& key) const {
  const auto value = raw(section, key);
  std::vector<std::string> out;
  if (!value || trim(*value).empty()) return out;
  for (const auto& part : split(*value, ',')) {
    if (part.empty()) throw ConfigError(section + "." + key + ": empty list element");
    out.push_back(part);
  }
  return out;
}

RMat Config::get_matrix(const std::string& section, const std::string& key) const {
  const auto value = raw(section, key);
  if (!value || trim(*value).empty()) return {};
  const std::string what = section + "." + key;
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(*value, ';')) {
    if (row.empty()) continue;
    std::vector<double> entries;
    for (const auto& part : split(row, ',')) entries.push_back(parse_double(part, what));
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  RMat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ConfigError(what + ": ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [section, bucket] : entries_)
    for (const auto& [key, value] : bucket) {
      const std::string name = section + "." + key;
      if (!consumed_.count(name)) out.push_back(name);
    }
  return out;
}

std::string Config::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, bucket] : entries_) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, value] : bucket) out << key << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace rismtc
