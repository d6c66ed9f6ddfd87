// SPDX-License-Identifier: Apache-2.0
/**
 * @file   appliance.hpp
 * @brief  Per-appliance on-power thresholds and household splits.
 */
#pragma once

#include <string>
#include <vector>

namespace nilm {

struct ApplianceSpec {
  std::string name;
  double on_power_threshold = 0.0; ///< watts
  std::vector<int> train_households;
  std::vector<int> test_households;

  /// Throws ConfigError on an empty name, a non-positive threshold or a
  /// household listed in both splits.
  void validate() const;
  bool operator==(const ApplianceSpec &) const = default;
};

/// Kettle, microwave, dishwasher and washing machine with the REFIT splits.
std::vector<ApplianceSpec> default_appliance_specs();

/// YAML: a top-level `appliances` map from name to
/// `{threshold, train: [...], test: [...]}`.
std::vector<ApplianceSpec> parse_appliance_specs(const std::string &yaml_text);
std::vector<ApplianceSpec> load_appliance_specs(const std::string &path);
std::string format_appliance_specs(const std::vector<ApplianceSpec> &specs);

/// Throws ConfigError naming the appliance if it is not listed.
const ApplianceSpec &find_appliance(const std::vector<ApplianceSpec> &specs,
                                    const std::string &name);

} // namespace nilm
