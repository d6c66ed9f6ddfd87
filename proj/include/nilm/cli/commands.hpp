// SPDX-License-Identifier: Apache-2.0
/**
 * @file   commands.hpp
 * @brief  The pipeline commands behind the `nilm` tool. Each command reads
 *         only its Settings, so a manifest's configuration repeats it.
 */
#pragma once

#include <nilm/cli/manifest.hpp>
#include <nilm/cli/settings.hpp>
#include <nilm/data/appliance.hpp>
#include <nilm/model/config.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace nilm {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

const std::vector<std::string> &command_names();

/// Fills defaults, validates every key and runs the command. Throws on
/// failure; see exit_code_for().
void run_command(const std::string &command, Settings settings, std::ostream &log);

/// Runs `command` and maps exceptions to exit codes, printing the message
/// to `err`.
int run_command_guarded(const std::string &command, const Settings &settings,
                        std::ostream &log, std::ostream &err);

/// Repeats a manifest's command with `overrides` applied on top of its
/// configuration; checks input digests first and compares outputs after.
/// Returns kExitFailure when a non-timing output differs.
int rerun_manifest(const std::string &manifest_path, const Settings &overrides,
                   std::ostream &log, std::ostream &err);

/// Where a command writes its manifest, given resolved settings.
std::string manifest_path_for(const std::string &command, const Settings &settings);

/// `NILM_CONFIG_DIR`, or empty.
std::string config_directory();
/// `data.appliances_file`, else `<config dir>/appliances.yaml`, else the
/// built-in table.
std::vector<ApplianceSpec> appliance_specs_for(const Settings &settings);

/// Resolves model.* and train.* defaults into `settings` and builds the
/// architecture config. Throws ConfigError when layers and receptive field
/// disagree.
ModelConfig resolve_model_config(Settings &settings);

} // namespace nilm
