// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Flat run configuration:
//
//     # comment
//     experiment = cc_sweep
//     problem.gamma = 1.0
//     solver.continuation = 2, 1.5, 1.2, 1.1
//
// Keys are `name` or `section.name`. Later duplicates are an error.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace onelap {

class Config {
 public:
  /// Throws ConfigError naming the line on malformed input.
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return values_; }

  // Typed getters throw ConfigError naming the key on a bad value.
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const;

  /// Canonical `key = value` text, sorted by key.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace onelap
