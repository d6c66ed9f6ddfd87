// SPDX-License-Identifier: Apache-2.0
/**
 * @file   ops.hpp
 * @brief  Pointwise activations, elementwise arithmetic, dense layers and
 *         crops, each with a reverse-mode counterpart.
 *
 * Backward functions accumulate into the grad buffers of their inputs
 * (allocating zeros first when absent); they never overwrite.
 */
#pragma once

#include <nilm/core/tensor.hpp>

namespace nilm {

/// Probabilities leaving sigmoid() are confined to this band so that a
/// following logarithm stays finite.
inline constexpr double kSigmoidClamp = 1e-7;

template <typename Real> Tensor<Real> relu(const Tensor<Real> &x);
template <typename Real>
void relu_backward(Tensor<Real> &x, const Tensor<Real> &grad_out);

template <typename Real> Tensor<Real> sigmoid(const Tensor<Real> &x);
/// `y` is the forward output of sigmoid(x).
template <typename Real>
void sigmoid_backward(Tensor<Real> &x, const Tensor<Real> &y,
                      const Tensor<Real> &grad_out);

template <typename Real> Tensor<Real> tanh(const Tensor<Real> &x);
template <typename Real>
void tanh_backward(Tensor<Real> &x, const Tensor<Real> &y,
                   const Tensor<Real> &grad_out);

template <typename Real>
Tensor<Real> add(const Tensor<Real> &a, const Tensor<Real> &b);
template <typename Real>
void add_backward(Tensor<Real> &a, Tensor<Real> &b,
                  const Tensor<Real> &grad_out);

template <typename Real>
Tensor<Real> mul(const Tensor<Real> &a, const Tensor<Real> &b);
template <typename Real>
void mul_backward(Tensor<Real> &a, Tensor<Real> &b,
                  const Tensor<Real> &grad_out);

template <typename Real> struct DenseParams {
  Tensor<Real> weight; ///< [out, in]
  Tensor<Real> bias;   ///< [out]

  DenseParams() = default;
  DenseParams(std::size_t out, std::size_t in)
    : weight({out, in}), bias({out}) {}
  std::size_t out_features() const { return weight.extent(0); }
  std::size_t in_features() const { return weight.extent(1); }
};

/// Row-wise affine map: [rows, in] -> [rows, out].
template <typename Real>
Tensor<Real> dense_forward(const Tensor<Real> &x,
                           const DenseParams<Real> &params);
template <typename Real>
void dense_backward(Tensor<Real> &x, DenseParams<Real> &params,
                    const Tensor<Real> &grad_out, bool propagate = true);

/// Sub-block [c0, c0+channels) x [t0, t0+length) of a [C, T] map.
template <typename Real>
Tensor<Real> crop(const Tensor<Real> &x, std::size_t c0, std::size_t channels,
                  std::size_t t0, std::size_t length);
template <typename Real>
void crop_backward(Tensor<Real> &x, std::size_t c0, std::size_t t0,
                   const Tensor<Real> &grad_out);

} // namespace nilm
