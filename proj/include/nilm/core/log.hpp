// SPDX-License-Identifier: Apache-2.0
/**
 * @file   log.hpp
 * @brief  Warning sink; stderr unless replaced.
 */
#pragma once

#include <functional>
#include <string>

namespace nilm {

using WarningSink = std::function<void(const std::string &)>;

void warn(const std::string &message);
/// Installs `sink` (an empty function mutes warnings) and returns the
/// previous one.
WarningSink set_warning_sink(WarningSink sink);

/// Mutes warnings for the lifetime of the object.
class ScopedWarningMute {
 public:
  ScopedWarningMute() : previous_(set_warning_sink({})) {}
  ~ScopedWarningMute() { set_warning_sink(std::move(previous_)); }
  ScopedWarningMute(const ScopedWarningMute &) = delete;
  ScopedWarningMute &operator=(const ScopedWarningMute &) = delete;

 private:
  WarningSink previous_;
};

} // namespace nilm
