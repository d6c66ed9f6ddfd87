// SPDX-License-Identifier: Apache-2.0
/**
 * @file   conv1d.hpp
 * @brief  Valid (unpadded) dilated 1-D convolution over [channels, time] maps.
 *
 *   out[o, t] = bias[o] + sum_i sum_tau in[i, t + tau * dilation] * w[o, i, tau]
 *
 * Every output element accumulates its terms in the same (i, tau) order with
 * fused multiply-adds, independent of the time extent. Two calls whose
 * windows overlap therefore agree bitwise on the shared outputs.
 */
#pragma once

#include <nilm/core/tensor.hpp>

namespace nilm {

template <typename Real> struct Conv1dParams {
  Tensor<Real> filters; ///< [k_out, k_in, m]
  Tensor<Real> bias;    ///< [k_out]
  std::size_t dilation = 1;

  Conv1dParams() = default;
  Conv1dParams(std::size_t k_out, std::size_t k_in, std::size_t m,
               std::size_t dilation = 1);

  std::size_t out_channels() const { return filters.extent(0); }
  std::size_t in_channels() const { return filters.extent(1); }
  std::size_t length() const { return filters.extent(2); }
  /// Time samples consumed beyond the first: (m - 1) * dilation.
  std::size_t shrink() const { return (length() - 1) * dilation; }
};

/// Output time extent for a valid convolution, or throws ShapeError.
std::size_t conv1d_output_length(std::size_t input_length, std::size_t m,
                                 std::size_t dilation);

template <typename Real>
Tensor<Real> conv1d_forward(const Tensor<Real> &input,
                            const Conv1dParams<Real> &params);

/// Accumulates d(loss)/d(filters, bias) into the parameter grad buffers and,
/// when `propagate` is set, d(loss)/d(input) into input's grad buffer.
template <typename Real>
void conv1d_backward(Tensor<Real> &input, Conv1dParams<Real> &params,
                     const Tensor<Real> &grad_out, bool propagate = true);

} // namespace nilm
