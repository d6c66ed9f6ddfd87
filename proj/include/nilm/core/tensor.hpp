// SPDX-License-Identifier: Apache-2.0
/**
 * @file   tensor.hpp
 * @brief  Dense row-major tensor with an optional gradient buffer.
 *
 * Layer activations are laid out channel-major: a feature map is [channels,
 * time], a recurrent sequence is [time, features].
 */
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

using Shape = std::vector<std::size_t>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string to_string(const Shape &shape);
std::size_t shape_size(const Shape &shape);

template <typename Real> class Tensor {
 public:
  using value_type = Real;

  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<Real> values);
  Tensor(std::initializer_list<std::size_t> shape)
    : Tensor(Shape(shape)) {}

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<Real> values() { return values_; }
  std::span<const Real> values() const { return values_; }
  Real *data() { return values_.data(); }
  const Real *data() const { return values_.data(); }

  Real &operator[](std::size_t i) { return values_[i]; }
  const Real &operator[](std::size_t i) const { return values_[i]; }

  Real &at(std::size_t i, std::size_t j) { return values_[i * shape_[1] + j]; }
  const Real &at(std::size_t i, std::size_t j) const {
    return values_[i * shape_[1] + j];
  }
  Real &at(std::size_t i, std::size_t j, std::size_t k) {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const Real &at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }

  bool has_grad() const { return !grad_.empty() || values_.empty(); }
  /// Allocates a zero gradient buffer if none is attached yet.
  std::span<Real> grad();
  std::span<const Real> grad() const;
  void zero_grad();
  void drop_grad() { std::vector<Real>().swap(grad_); }
  /// Moves the gradient out as a tensor of the same shape (zeros if absent).
  Tensor release_grad();

  /// Same values, new shape of equal size.
  void reshape(Shape shape);

 private:
  Shape shape_;
  std::vector<Real> values_;
  std::vector<Real> grad_;
};

/// Throws ShapeError unless `actual == expected`.
void require_shape(const Shape &actual, const Shape &expected,
                   const char *what);

extern template class Tensor<float>;
extern template class Tensor<double>;

} // namespace nilm
