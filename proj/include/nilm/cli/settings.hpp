// SPDX-License-Identifier: Apache-2.0
/**
 * @file   settings.hpp
 * @brief  Nested key-value configuration: a YAML file merged with
 *         `--section.key=value` overrides.
 */
#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace nilm {

class Settings {
 public:
  Settings();
  /// Copies are deep; YAML nodes alone would alias.
  Settings(const Settings &other);
  Settings &operator=(const Settings &other);
  Settings(Settings &&) = default;
  Settings &operator=(Settings &&) = default;
  static Settings parse(const std::string &yaml_text, const std::string &origin);
  static Settings load(const std::string &path);

  /// Sets a dotted key; the value is read as a YAML scalar or flow list.
  void set(const std::string &key, const std::string &value);
  void set_node(const std::string &key, const YAML::Node &value);
  /// Sets the key only when it is absent.
  void set_default(const std::string &key, const std::string &value);
  bool has(const std::string &key) const;
  /// The value under a dotted key, or an undefined node.
  YAML::Node node(const std::string &key) const;
  /// Sets every leaf of `other`, replacing existing values.
  void merge(const Settings &other);
  void erase(const std::string &key);

  std::string str(const std::string &key) const;
  double number(const std::string &key) const;
  std::size_t count(const std::string &key) const;
  std::uint64_t u64(const std::string &key) const;
  bool flag(const std::string &key) const;
  std::vector<std::string> strings(const std::string &key) const;
  std::vector<std::size_t> counts(const std::string &key) const;

  /// Dotted names of every leaf.
  std::vector<std::string> keys() const;
  /// Throws ConfigError naming the first key outside `known`.
  void require_known(const std::set<std::string> &known) const;

  /// Canonical YAML with sorted keys.
  std::string snapshot() const;
  const YAML::Node &root() const { return root_; }

 private:
  YAML::Node find(const std::string &key) const;
  YAML::Node root_;
};

/// Splits `--a.b=value` / `--a.b value` arguments into key/value pairs.
/// Throws ConfigError on anything else.
std::vector<std::pair<std::string, std::string>>
parse_overrides(const std::vector<std::string> &args);

} // namespace nilm
