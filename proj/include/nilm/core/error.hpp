// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace nilm {

/// Invalid configuration values or files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file that cannot be opened, read or written; names the path.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

} // namespace nilm
