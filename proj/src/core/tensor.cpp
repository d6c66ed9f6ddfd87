// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/tensor.hpp>

#include <algorithm>

namespace nilm {

std::string to_string(const Shape &shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i)
      out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape &shape) {
  std::size_t n = 1;
  for (auto e : shape)
    n *= e;
  return n;
}

void require_shape(const Shape &actual, const Shape &expected,
                   const char *what) {
  if (actual != expected)
    throw ShapeError(std::string(what) + ": expected shape " +
                     to_string(expected) + ", got " + to_string(actual));
}

template <typename Real>
Tensor<Real>::Tensor(Shape shape)
  : shape_(std::move(shape)), values_(shape_size(shape_), Real(0)) {}

template <typename Real>
Tensor<Real>::Tensor(Shape shape, std::vector<Real> values)
  : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_size(shape_) != values_.size())
    throw ShapeError("tensor of shape " + to_string(shape_) + " needs " +
                     std::to_string(shape_size(shape_)) + " values, got " +
                     std::to_string(values_.size()));
}

template <typename Real> std::span<Real> Tensor<Real>::grad() {
  if (grad_.size() != values_.size())
    grad_.assign(values_.size(), Real(0));
  return grad_;
}

template <typename Real> std::span<const Real> Tensor<Real>::grad() const {
  if (grad_.size() != values_.size())
    throw std::logic_error("tensor has no gradient buffer");
  return grad_;
}

template <typename Real> void Tensor<Real>::zero_grad() {
  std::fill(grad_.begin(), grad_.end(), Real(0));
}

template <typename Real> Tensor<Real> Tensor<Real>::release_grad() {
  if (grad_.size() != values_.size())
    grad_.assign(values_.size(), Real(0));
  Tensor<Real> out;
  out.shape_ = shape_;
  out.values_ = std::move(grad_);
  grad_.clear();
  return out;
}

template <typename Real> void Tensor<Real>::reshape(Shape shape) {
  if (shape_size(shape) != values_.size())
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " +
                     to_string(shape));
  shape_ = std::move(shape);
}

template class Tensor<float>;
template class Tensor<double>;

} // namespace nilm
