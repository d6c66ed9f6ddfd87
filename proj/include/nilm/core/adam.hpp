// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nilm/core/tensor.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace nilm {

struct AdamOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment buffers, one per tracked parameter tensor.
template <typename Real> struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<Real>> m1, m2;
  AdamOptions options;

  AdamState() = default;
  explicit AdamState(AdamOptions opts) : options(opts) {}
};

/// One bias-corrected Adam update of every tensor in `params` from its grad
/// buffer. Moment buffers are sized on first use and must keep matching.
template <typename Real>
void adam_step(std::span<Tensor<Real> *const> params, AdamState<Real> &state);

} // namespace nilm
