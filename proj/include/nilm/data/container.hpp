// SPDX-License-Identifier: Apache-2.0
/**
 * @file   container.hpp
 * @brief  Little-endian binary container shared by model and dataset files.
 *
 *   magic      8 bytes
 *   version    u32
 *   header     u32 length + UTF-8 `key=value` lines
 *   count      u32
 *   count x blob:
 *     name     u32 length + bytes
 *     rank     u32
 *     extents  rank x u64
 *     values   product(extents) x element (f32 for models, f64 for datasets)
 */
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Magic = std::array<char, 8>;

template <typename Element> struct Blob {
  std::string name;
  std::vector<std::uint64_t> extents;
  std::vector<Element> values;
};

template <typename Element> struct Container {
  std::uint32_t version = 1;
  std::string header;
  std::vector<Blob<Element>> blobs;
};

/// Serialises to bytes; Element must be float or double.
template <typename Element>
std::string encode_container(const Magic &magic, const Container<Element> &c);
template <typename Element>
Container<Element> decode_container(const Magic &magic, const std::string &bytes);

/// Whole-file helpers; errors name the path.
void write_file(const std::string &path, const std::string &bytes);
std::string read_file(const std::string &path);

} // namespace nilm
