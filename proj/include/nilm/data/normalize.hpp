// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nilm/data/series.hpp>

#include <span>
#include <string>
#include <vector>

namespace nilm {

/// Z-score statistics for one channel, computed over training households.
struct NormalizationStats {
  std::string channel;
  double mean = 0.0;
  double std = 1.0; ///< population standard deviation, > 0

  double normalize(double watts) const { return (watts - mean) / std; }
  double denormalize(double z) const { return z * std + mean; }
  std::vector<double> normalize(std::span<const double> watts) const;

  bool operator==(const NormalizationStats &) const = default;
};

/// Mean and population std over the concatenation of `parts`. Each part is
/// reduced exactly (two passes) and the partial moments are merged, so the
/// result does not depend on how the samples are split into households.
/// Throws std::invalid_argument for empty or constant data.
NormalizationStats compute_norm_stats(
  std::span<const std::span<const double>> parts, const std::string &channel);

NormalizationStats compute_norm_stats(std::span<const double> values,
                                      const std::string &channel);

} // namespace nilm
