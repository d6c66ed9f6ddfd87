// SPDX-License-Identifier: Apache-2.0
#include <nilm/data/appliance.hpp>
#include <nilm/data/container.hpp>
#include <nilm/core/error.hpp>

#include <yaml-cpp/yaml.h>

#include <algorithm>

namespace nilm {

void ApplianceSpec::validate() const {
  if (name.empty())
    throw ConfigError("appliance with an empty name");
  if (!(on_power_threshold > 0.0))
    throw ConfigError("appliance '" + name +
                      "': on-power threshold must be > 0");
  for (int h : train_households)
    if (std::find(test_households.begin(), test_households.end(), h) !=
        test_households.end())
      throw ConfigError("appliance '" + name + "': household " +
                        std::to_string(h) + " is in both train and test");
}

std::vector<ApplianceSpec> default_appliance_specs() {
  return {
    {"kettle", 2000.0, {2, 3, 4, 5, 6, 7, 8, 9, 11, 12, 13}, {17, 19, 20, 21}},
    {"microwave", 200.0, {2, 3, 4, 5, 6, 8, 9, 10, 11, 12, 15}, {17, 18, 19, 20}},
    {"dishwasher", 10.0, {1, 2, 3, 5, 6, 7, 9, 10, 11, 13, 15}, {16, 18, 20, 21}},
    {"washing_machine", 20.0,
     {1, 2, 3, 5, 6, 7, 8, 9, 10, 11, 13, 15, 16, 17}, {18, 19, 20, 21}},
  };
}

std::vector<ApplianceSpec> parse_appliance_specs(const std::string &yaml_text) {
  std::vector<ApplianceSpec> out;
  try {
    const YAML::Node root = YAML::Load(yaml_text);
    const YAML::Node list = root["appliances"];
    if (!list || !list.IsMap())
      throw ConfigError("appliance file needs an 'appliances' map");
    for (const auto &item : list) {
      ApplianceSpec spec;
      spec.name = item.first.as<std::string>();
      const YAML::Node &v = item.second;
      if (!v["threshold"])
        throw ConfigError("appliance '" + spec.name + "' has no threshold");
      spec.on_power_threshold = v["threshold"].as<double>();
      if (v["train"])
        spec.train_households = v["train"].as<std::vector<int>>();
      if (v["test"])
        spec.test_households = v["test"].as<std::vector<int>>();
      spec.validate();
      out.push_back(std::move(spec));
    }
  } catch (const YAML::Exception &e) {
    throw ConfigError(std::string("appliance file: ") + e.what());
  }
  return out;
}

std::vector<ApplianceSpec> load_appliance_specs(const std::string &path) {
  return parse_appliance_specs(read_file(path));
}

std::string format_appliance_specs(const std::vector<ApplianceSpec> &specs) {
  YAML::Emitter e;
  e << YAML::BeginMap << YAML::Key << "appliances" << YAML::Value
    << YAML::BeginMap;
  for (const auto &s : specs) {
    e << YAML::Key << s.name << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "threshold" << YAML::Value << s.on_power_threshold;
    e << YAML::Key << "train" << YAML::Value << YAML::Flow << s.train_households;
    e << YAML::Key << "test" << YAML::Value << YAML::Flow << s.test_households;
    e << YAML::EndMap;
  }
  e << YAML::EndMap << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

const ApplianceSpec &find_appliance(const std::vector<ApplianceSpec> &specs,
                                    const std::string &name) {
  for (const auto &s : specs)
    if (s.name == name)
      return s;
  throw ConfigError("unknown appliance '" + name + "'");
}

} // namespace nilm
