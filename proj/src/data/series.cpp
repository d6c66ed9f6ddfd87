// SPDX-License-Identifier: Apache-2.0
#include <nilm/data/series.hpp>

#include <stdexcept>

namespace nilm {

ReadingSeries resample(const ReadingSeries &series, std::int64_t interval,
                       std::int64_t tolerance) {
  if (series.timestamps.size() != series.watts.size())
    throw std::invalid_argument("resample: timestamp and value counts differ");
  if (interval <= 0 || tolerance <= 0)
    throw std::invalid_argument("resample: interval and tolerance must be > 0");
  ReadingSeries out;
  out.channel = series.channel;
  out.household = series.household;
  const auto &ts = series.timestamps;
  if (ts.empty())
    return out;
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] <= ts[i - 1])
      throw std::invalid_argument("resample: timestamps not strictly "
                                  "increasing at index " + std::to_string(i));

  const std::int64_t first = ts.front();
  const std::size_t points = std::size_t((ts.back() - first) / interval) + 1;
  out.timestamps.reserve(points);
  out.watts.reserve(points);
  std::size_t next = 0; // first raw reading not yet at or before g
  for (std::size_t k = 0; k < points; ++k) {
    const std::int64_t g = first + std::int64_t(k) * interval;
    while (next < ts.size() && ts[next] <= g)
      ++next;
    double w = kMissing;
    if (next > 0 && ts[next - 1] > g - tolerance)
      w = series.watts[next - 1];
    out.timestamps.push_back(g);
    out.watts.push_back(w);
  }
  return out;
}

ReadingSeries fill_gaps(const ReadingSeries &series, std::int64_t limit) {
  ReadingSeries out = series;
  auto &w = out.watts;
  const std::size_t n = w.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_missing(w[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && is_missing(w[j]))
      ++j;
    // Duration of the run measured on the grid.
    std::int64_t duration;
    if (out.timestamps.size() == n && n > 1) {
      const std::int64_t step = out.timestamps[1] - out.timestamps[0];
      duration = std::int64_t(j - i) * step;
    } else {
      duration = std::int64_t(j - i) * kResampleInterval;
    }
    const bool forward = i > 0 && duration < limit;
    const double fill = forward ? w[i - 1] : 0.0;
    for (std::size_t k = i; k < j; ++k)
      w[k] = fill;
    i = j;
  }
  return out;
}

std::vector<std::uint8_t> binarize(std::span<const double> watts,
                                   double threshold) {
  if (!(threshold > 0))
    throw std::invalid_argument("binarize: threshold must be positive");
  std::vector<std::uint8_t> out(watts.size());
  for (std::size_t i = 0; i < watts.size(); ++i)
    out[i] = watts[i] >= threshold ? 1 : 0;
  return out;
}

} // namespace nilm
