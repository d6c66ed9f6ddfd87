// SPDX-License-Identifier: Apache-2.0
/**
 * @file   series.hpp
 * @brief  Meter readings and the preprocessing applied before windowing:
 *         10 s resampling, gap filling and on/off binarisation.
 */
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace nilm {

inline const std::string kAggregateChannel = "aggregate";

/// Marker for grid points with no eligible reading, present only between
/// resample() and fill_gaps().
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double w) { return w != w; }

struct ReadingSeries {
  std::vector<std::int64_t> timestamps; ///< epoch seconds, strictly increasing
  std::vector<double> watts;
  std::string channel = kAggregateChannel;
  int household = 0;

  std::size_t size() const { return watts.size(); }
  bool operator==(const ReadingSeries &) const = default;
};

inline constexpr std::int64_t kResampleInterval = 10;
inline constexpr std::int64_t kGapFillLimit = 180;

/// Places readings on a uniform grid from the first to the last timestamp.
/// Grid point g takes the latest reading with g - tolerance < t <= g; points
/// with none are kMissing. Throws std::invalid_argument on non-increasing
/// timestamps.
ReadingSeries resample(const ReadingSeries &series,
                       std::int64_t interval = kResampleInterval,
                       std::int64_t tolerance = kResampleInterval);

/// Missing runs lasting less than `limit` seconds repeat the last observed
/// value; longer runs, and runs with no earlier observation, become 0 W.
ReadingSeries fill_gaps(const ReadingSeries &series,
                        std::int64_t limit = kGapFillLimit);

/// 1 where watts >= threshold, else 0.
std::vector<std::uint8_t> binarize(std::span<const double> watts,
                                   double threshold);

} // namespace nilm
