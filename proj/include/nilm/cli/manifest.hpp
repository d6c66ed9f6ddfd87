// SPDX-License-Identifier: Apache-2.0
/**
 * @file   manifest.hpp
 * @brief  Run manifests: the resolved configuration, input digests and
 *         outputs of one command, enough to repeat it.
 */
#pragma once

#include <nilm/cli/settings.hpp>

#include <string>
#include <vector>

namespace nilm {

inline constexpr const char *kToolVersion = "0.1.0";

/// Lower-case hex SHA-256 of a file's bytes or of a string.
std::string sha256_file(const std::string &path);
std::string sha256_hex(const std::string &bytes);

struct FileDigest {
  std::string path;
  std::string sha256; ///< empty until the file exists
  /// Outputs that carry wall-clock timings are not expected to repeat
  /// byte for byte.
  bool timing = false;
  bool operator==(const FileDigest &) const = default;
};

struct RunManifest {
  std::string command;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  Settings config;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string status = "running"; ///< running | complete | failed

  std::string to_yaml() const;
  static RunManifest parse(const std::string &yaml_text);
  static RunManifest load(const std::string &path);
  void save(const std::string &path) const;
};

} // namespace nilm
