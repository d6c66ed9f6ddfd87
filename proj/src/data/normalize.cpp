// SPDX-License-Identifier: Apache-2.0
#include <nilm/data/normalize.hpp>

#include <cmath>
#include <stdexcept>

namespace nilm {

std::vector<double>
NormalizationStats::normalize(std::span<const double> watts) const {
  std::vector<double> out(watts.size());
  for (std::size_t i = 0; i < watts.size(); ++i)
    out[i] = normalize(watts[i]);
  return out;
}

NormalizationStats compute_norm_stats(
  std::span<const std::span<const double>> parts, const std::string &channel) {
  double n = 0, mean = 0, m2 = 0;
  for (const auto part : parts) {
    if (part.empty())
      continue;
    const double nb = double(part.size());
    double mb = 0;
    for (double v : part)
      mb += v;
    mb /= nb;
    double m2b = 0;
    for (double v : part)
      m2b += (v - mb) * (v - mb);
    // Chan et al. pairwise merge of (count, mean, M2).
    const double total = n + nb;
    const double delta = mb - mean;
    mean += delta * nb / total;
    m2 += m2b + delta * delta * n * nb / total;
    n = total;
  }
  if (n == 0)
    throw std::invalid_argument("normalization: no training samples for '" +
                                channel + "'");
  const double sd = std::sqrt(m2 / n);
  if (!(sd > 0))
    throw std::invalid_argument("normalization: channel '" + channel +
                                "' is constant (std = 0)");
  return {channel, mean, sd};
}

NormalizationStats compute_norm_stats(std::span<const double> values,
                                      const std::string &channel) {
  const std::span<const double> parts[] = {values};
  return compute_norm_stats(parts, channel);
}

} // namespace nilm
