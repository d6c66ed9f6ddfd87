// SPDX-License-Identifier: Apache-2.0
/**
 * @file   gru.hpp
 * @brief  Gated recurrent unit over a [time, features] sequence, with
 *         backpropagation through time.
 *
 *   r_t  = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
 *   z_t  = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
 *   h~_t = tanh(W x_t + U (r_t * h_{t-1}) + b)
 *   h_t  = z_t * h_{t-1} + (1 - z_t) * h~_t
 *
 * The update gate keeps the previous state (z -> 1 copies h_{t-1}).
 */
#pragma once

#include <nilm/core/tensor.hpp>

#include <vector>

namespace nilm {

enum class Direction { forward, backward };

template <typename Real> struct GruCellParams {
  Tensor<Real> W_r, W_z, W; ///< [hidden, input]
  Tensor<Real> U_r, U_z, U; ///< [hidden, hidden]
  Tensor<Real> b_r, b_z, b; ///< [hidden]

  GruCellParams() = default;
  GruCellParams(std::size_t hidden, std::size_t input);

  std::size_t hidden_size() const { return U.extent(0); }
  std::size_t input_size() const { return W.extent(1); }
  /// Throws ShapeError if the nine tensors disagree.
  void validate() const;
};

/// Per-step gate activations recorded by gru_forward for the backward pass,
/// stored in processing order.
template <typename Real> struct GruCache {
  std::vector<Real> reset, update, candidate, h_prev; ///< each [T * hidden]
};

/// inputs [T, input], h0 [hidden] -> [T, hidden]. With Direction::backward
/// the recurrence runs from t = T-1 down to 0; row t of the output is still
/// the state at time t.
template <typename Real>
Tensor<Real> gru_forward(const Tensor<Real> &inputs, const Tensor<Real> &h0,
                         const GruCellParams<Real> &params,
                         Direction direction = Direction::forward,
                         GruCache<Real> *cache = nullptr);

/// Accumulates gradients into inputs, h0 and all nine parameter tensors.
/// `cache` must come from gru_forward on the same arguments.
template <typename Real>
void gru_backward(Tensor<Real> &inputs, Tensor<Real> &h0,
                  GruCellParams<Real> &params, Direction direction,
                  const GruCache<Real> &cache, const Tensor<Real> &grad_out,
                  bool propagate = true);

} // namespace nilm
