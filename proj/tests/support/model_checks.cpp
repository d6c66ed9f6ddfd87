// SPDX-License-Identifier: Apache-2.0
#include "model_checks.hpp"

#include <nilm/core/rng.hpp>

#include <bit>
#include <cmath>
#include <stdexcept>

namespace nilm::testing {

template <typename Real>
void randomize_parameters(Model<Real> &model, std::uint64_t seed,
                          double scale) {
  CounterRng rng(seed);
  for (auto &p : model.parameters())
    for (auto &v : p.tensor->values())
      v = Real(rng.uniform(-scale, scale));
}

template void randomize_parameters(Model<float> &, std::uint64_t, double);
template void randomize_parameters(Model<double> &, std::uint64_t, double);

InfluenceRegion measure_influence(const Model<double> &model,
                                  std::size_t output_index,
                                  std::uint64_t seed) {
  // A rectifier that happens to be off for one window can hide a path, so
  // the region is the union over several random windows.
  constexpr int kTrials = 4;
  const std::size_t n = model.config().window_length();
  std::vector<bool> moves(n, false);
  CounterRng rng(seed);
  std::vector<double> window(n);
  for (int trial = 0; trial < kTrials; ++trial) {
    for (auto &v : window)
      v = rng.uniform(-1.0, 1.0);
    const double base = model.forward(window)[output_index];
    for (std::size_t i = 0; i < n; ++i) {
      const double saved = window[i];
      window[i] = saved + 0.75;
      if (model.forward(window)[output_index] != base)
        moves[i] = true;
      window[i] = saved;
    }
  }
  InfluenceRegion reg;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i)
    if (moves[i]) {
      if (!any)
        reg.first = i;
      reg.last = i;
      any = true;
      ++reg.count;
    }
  return reg;
}

EquivalenceResult compare_fast_to_pointwise(const Model<double> &fast,
                                            const Model<double> &point,
                                            std::uint64_t seed) {
  const auto &cf = fast.config();
  if (point.config().target_field != 1 ||
      point.config().receptive_field != cf.receptive_field)
    throw std::invalid_argument("pointwise model must have r = 1 and equal L");
  const std::size_t L = cf.receptive_field, r = cf.target_field;
  CounterRng rng(seed);
  std::vector<double> window(cf.window_length());
  for (auto &v : window)
    v = rng.normal();
  const auto out = fast.forward(window);
  EquivalenceResult res;
  for (std::size_t k = 0; k < r; ++k) {
    const auto single =
      point.forward(std::span<const double>(window).subspan(k, L));
    ++res.compared;
    if (std::bit_cast<std::uint64_t>(single[0]) !=
        std::bit_cast<std::uint64_t>(out[k]))
      ++res.bitwise_mismatches;
    res.max_abs_diff = std::max(res.max_abs_diff, std::abs(single[0] - out[k]));
  }
  return res;
}

} // namespace nilm::testing
