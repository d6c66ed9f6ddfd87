// SPDX-License-Identifier: Apache-2.0
/**
 * @file   loss.hpp
 * @brief  Target-field losses: mean absolute error for disaggregation and
 *         binary cross-entropy for on/off classification.
 */
#pragma once

#include <span>
#include <vector>

namespace nilm {

template <typename Real> struct LossResult {
  Real value = 0;
  std::vector<Real> grad; ///< d(value)/d(prediction), same length as input
};

/// (1/r) sum |pred - target|; the subgradient at a zero difference is 0.
template <typename Real>
LossResult<Real> mae_loss(std::span<const Real> pred,
                          std::span<const Real> target);

/// -(1/r) sum [z ln p + (1 - z) ln(1 - p)] with p clamped to
/// [kSigmoidClamp, 1 - kSigmoidClamp]. Targets must be exactly 0 or 1.
template <typename Real>
LossResult<Real> bce_loss(std::span<const Real> prob,
                          std::span<const Real> target);

} // namespace nilm
