// SPDX-License-Identifier: Apache-2.0
/**
 * @file   config.hpp
 * @brief  Architecture configuration shared by the three model families.
 */
#pragma once

#include <nilm/core/error.hpp>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

enum class Family { cnn, rnn, wavenet };
enum class Head { regression, classification };

std::string to_string(Family f);
std::string to_string(Head h);
Family parse_family(const std::string &s);
Head parse_head(const std::string &s);

struct CnnLayerSpec {
  std::size_t filters = 0;
  std::size_t length = 0;
  bool operator==(const CnnLayerSpec &) const = default;
};

/// Receptive field of `layers` stacked dilated convolutions with dilations
/// 1, 2, ..., 2^(layers-1): (2^layers - 1) * (m - 1) + 1.
std::size_t wavenet_receptive_field(std::size_t layers,
                                    std::size_t filter_length = 3);
/// Inverse of wavenet_receptive_field; throws ConfigError when L is not of
/// that form.
std::size_t wavenet_layers_for(std::size_t receptive_field,
                               std::size_t filter_length = 3);

/// Five-layer seq2point stack (30x10, 30x8, 40x6, 50x5, 50x5). Receptive
/// fields too small for it get the same widths with lengths (5, 4, 3, 3, 3).
std::vector<CnnLayerSpec> default_cnn_filters(std::size_t receptive_field);

inline const std::vector<std::size_t> kReceptiveFieldPresets = {
  15, 31, 63, 127, 255, 511, 1023, 2047};
inline const std::vector<std::size_t> kTargetFieldPresets = {1, 10, 100, 1000};
/// Largest preset the CNN and RNN families are run at.
inline constexpr std::size_t kMaxRecurrentConvReceptiveField = 511;

struct ModelConfig {
  Family family = Family::wavenet;
  std::size_t layers = 6;             ///< dilated layers s (wavenet)
  std::size_t receptive_field = 127;  ///< L
  std::size_t target_field = 10;      ///< r
  std::size_t filter_length = 3;      ///< m (wavenet)
  std::size_t residual_channels = 32; ///< wavenet
  std::size_t skip_channels = 64;     ///< wavenet
  std::size_t hidden_size = 64;       ///< rnn, per direction
  std::size_t rnn_layers = 3;
  std::vector<CnnLayerSpec> cnn_filters; ///< empty: default_cnn_filters(L)
  std::size_t cnn_dense_units = 1024;
  Head head = Head::regression;
  std::uint64_t seed = 1;

  /// Input samples consumed per forward pass: L + r - 1.
  std::size_t window_length() const { return receptive_field + target_field - 1; }
  /// Offset of the first target sample inside the window: floor(L / 2).
  std::size_t target_offset() const { return receptive_field / 2; }
  std::vector<CnnLayerSpec> resolved_cnn_filters() const;

  void validate() const;

  /// Canonical `key=value` lines sorted by key.
  std::string to_text() const;
  static ModelConfig from_text(const std::string &text);

  bool operator==(const ModelConfig &) const = default;
};

/// WaveNet configuration with L derived from the layer count.
ModelConfig wavenet_config(std::size_t layers, std::size_t target_field,
                           Head head = Head::regression);

} // namespace nilm
