// SPDX-License-Identifier: Apache-2.0
// Perturbation and weight-sharing checks on built models.
#pragma once

#include <nilm/model/model.hpp>

#include <cstdint>

namespace nilm::testing {

/// Gives every parameter (biases included) a seeded uniform value so that no
/// path through the network is trivially dead.
template <typename Real>
void randomize_parameters(Model<Real> &model, std::uint64_t seed,
                          double scale = 0.5);

struct InfluenceRegion {
  std::size_t first = 0; ///< first window index that moves the output
  std::size_t last = 0;  ///< last such index
  std::size_t count = 0; ///< number of indices that move it
  bool contiguous() const { return count == last - first + 1; }
};

/// Perturbs every window sample in turn and records which ones change
/// output `output_index`.
InfluenceRegion measure_influence(const Model<double> &model,
                                  std::size_t output_index, std::uint64_t seed);

struct EquivalenceResult {
  std::size_t compared = 0;
  std::size_t bitwise_mismatches = 0;
  double max_abs_diff = 0.0;
};
/// Compares fast[k] with point(window[k, k + L)) on a random window, where
/// `point` is the r = 1 model with the same weights.
EquivalenceResult compare_fast_to_pointwise(const Model<double> &fast,
                                            const Model<double> &point,
                                            std::uint64_t seed);

} // namespace nilm::testing
