// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/ops.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

namespace nilm {

namespace {

template <typename Real>
void require_same(const Tensor<Real> &a, const Tensor<Real> &b,
                  const char *what) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     to_string(a.shape()) + " vs " + to_string(b.shape()));
}

// Single-precision exp from a range reduction and a degree-6 polynomial,
// accurate to about 2 ulp. It is plain arithmetic, so loops over it
// vectorise and every element gets the same bits wherever it sits.
inline float fast_exp(float x) {
  x = x < -87.0f ? -87.0f : x;
  x = x > 88.0f ? 88.0f : x;
  const float n = std::floor(std::fma(x, 1.44269504088896341f, 0.5f));
  float r = std::fma(n, -0.693359375f, x);
  r = std::fma(n, 2.12194440e-4f, r);
  float p = 1.9875691500e-4f;
  p = std::fma(p, r, 1.3981999507e-3f);
  p = std::fma(p, r, 8.3334519073e-3f);
  p = std::fma(p, r, 4.1665795894e-2f);
  p = std::fma(p, r, 1.6666665459e-1f);
  p = std::fma(p, r, 5.0000001201e-1f);
  p = std::fma(p, r * r, r) + 1.0f;
  const auto bits = std::uint32_t(std::int32_t(n) + 127) << 23;
  return p * std::bit_cast<float>(bits);
}

inline float exp_of(float x) { return fast_exp(x); }
inline double exp_of(double x) { return std::exp(x); }

template <typename Real> Real clamped_sigmoid(Real x) {
  const Real lo = Real(kSigmoidClamp);
  Real s = Real(1) / (Real(1) + exp_of(-x));
  s = s < lo ? lo : s;
  return s > Real(1) - lo ? Real(1) - lo : s;
}

inline float tanh_of(float x) {
  return 1.0f - 2.0f / (fast_exp(2.0f * x) + 1.0f);
}
inline double tanh_of(double x) { return std::tanh(x); }

} // namespace

template <typename Real> Tensor<Real> relu(const Tensor<Real> &x) {
  Tensor<Real> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = x[i] > Real(0) ? x[i] : Real(0);
  return y;
}

template <typename Real>
void relu_backward(Tensor<Real> &x, const Tensor<Real> &grad_out) {
  require_same(x, grad_out, "relu_backward");
  auto g = x.grad();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > Real(0))
      g[i] += grad_out[i];
}

template <typename Real> Tensor<Real> sigmoid(const Tensor<Real> &x) {
  Tensor<Real> y(x.shape());
  const Real *__restrict in = x.data();
  Real *__restrict out = y.data();
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = clamped_sigmoid(in[i]);
  return y;
}

template <typename Real>
void sigmoid_backward(Tensor<Real> &x, const Tensor<Real> &y,
                      const Tensor<Real> &grad_out) {
  require_same(x, grad_out, "sigmoid_backward");
  require_same(x, y, "sigmoid_backward");
  auto g = x.grad();
  for (std::size_t i = 0; i < x.size(); ++i)
    g[i] += grad_out[i] * y[i] * (Real(1) - y[i]);
}

template <typename Real> Tensor<Real> tanh(const Tensor<Real> &x) {
  Tensor<Real> y(x.shape());
  const Real *__restrict in = x.data();
  Real *__restrict out = y.data();
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = tanh_of(in[i]);
  return y;
}

template <typename Real>
void tanh_backward(Tensor<Real> &x, const Tensor<Real> &y,
                   const Tensor<Real> &grad_out) {
  require_same(x, grad_out, "tanh_backward");
  require_same(x, y, "tanh_backward");
  auto g = x.grad();
  for (std::size_t i = 0; i < x.size(); ++i)
    g[i] += grad_out[i] * (Real(1) - y[i] * y[i]);
}

template <typename Real>
Tensor<Real> add(const Tensor<Real> &a, const Tensor<Real> &b) {
  require_same(a, b, "add");
  Tensor<Real> c(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i)
    c[i] = a[i] + b[i];
  return c;
}

template <typename Real>
void add_backward(Tensor<Real> &a, Tensor<Real> &b,
                  const Tensor<Real> &grad_out) {
  require_same(a, grad_out, "add_backward");
  require_same(b, grad_out, "add_backward");
  auto ga = a.grad();
  auto gb = b.grad();
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    ga[i] += grad_out[i];
    gb[i] += grad_out[i];
  }
}

template <typename Real>
Tensor<Real> mul(const Tensor<Real> &a, const Tensor<Real> &b) {
  require_same(a, b, "mul");
  Tensor<Real> c(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i)
    c[i] = a[i] * b[i];
  return c;
}

template <typename Real>
void mul_backward(Tensor<Real> &a, Tensor<Real> &b,
                  const Tensor<Real> &grad_out) {
  require_same(a, grad_out, "mul_backward");
  require_same(b, grad_out, "mul_backward");
  auto ga = a.grad();
  auto gb = b.grad();
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    ga[i] += grad_out[i] * b[i];
    gb[i] += grad_out[i] * a[i];
  }
}

template <typename Real>
Tensor<Real> dense_forward(const Tensor<Real> &x,
                           const DenseParams<Real> &p) {
  if (x.rank() != 2 || x.extent(1) != p.in_features())
    throw ShapeError("dense: input " + to_string(x.shape()) +
                     " incompatible with weight " +
                     to_string(p.weight.shape()));
  const std::size_t rows = x.extent(0), in = p.in_features(),
                    out = p.out_features();
  Tensor<Real> y({rows, out});
  for (std::size_t r = 0; r < rows; ++r) {
    const Real *xr = x.data() + r * in;
    for (std::size_t o = 0; o < out; ++o) {
      const Real *wr = p.weight.data() + o * in;
      Real acc = p.bias[o];
      for (std::size_t i = 0; i < in; ++i)
        acc = std::fma(wr[i], xr[i], acc);
      y[r * out + o] = acc;
    }
  }
  return y;
}

template <typename Real>
void dense_backward(Tensor<Real> &x, DenseParams<Real> &p,
                    const Tensor<Real> &grad_out, bool propagate) {
  const std::size_t rows = x.extent(0), in = p.in_features(),
                    out = p.out_features();
  require_shape(grad_out.shape(), {rows, out}, "dense_backward grad_out");
  auto gw = p.weight.grad();
  auto gb = p.bias.grad();
  Real *gx = propagate ? x.grad().data() : nullptr;
  for (std::size_t r = 0; r < rows; ++r) {
    const Real *xr = x.data() + r * in;
    for (std::size_t o = 0; o < out; ++o) {
      const Real g = grad_out[r * out + o];
      if (g == Real(0))
        continue;
      gb[o] += g;
      Real *gwr = gw.data() + o * in;
      for (std::size_t i = 0; i < in; ++i)
        gwr[i] += g * xr[i];
      if (gx) {
        const Real *wr = p.weight.data() + o * in;
        for (std::size_t i = 0; i < in; ++i)
          gx[r * in + i] += g * wr[i];
      }
    }
  }
}

template <typename Real>
Tensor<Real> crop(const Tensor<Real> &x, std::size_t c0, std::size_t channels,
                  std::size_t t0, std::size_t length) {
  if (x.rank() != 2 || c0 + channels > x.extent(0) ||
      t0 + length > x.extent(1))
    throw ShapeError("crop: region exceeds " + to_string(x.shape()));
  const std::size_t T = x.extent(1);
  Tensor<Real> y({channels, length});
  for (std::size_t c = 0; c < channels; ++c)
    std::copy_n(x.data() + (c0 + c) * T + t0, length, y.data() + c * length);
  return y;
}

template <typename Real>
void crop_backward(Tensor<Real> &x, std::size_t c0, std::size_t t0,
                   const Tensor<Real> &grad_out) {
  const std::size_t channels = grad_out.extent(0), length = grad_out.extent(1);
  if (c0 + channels > x.extent(0) || t0 + length > x.extent(1))
    throw ShapeError("crop_backward: region exceeds " + to_string(x.shape()));
  const std::size_t T = x.extent(1);
  auto g = x.grad();
  for (std::size_t c = 0; c < channels; ++c) {
    Real *dst = g.data() + (c0 + c) * T + t0;
    const Real *src = grad_out.data() + c * length;
    for (std::size_t t = 0; t < length; ++t)
      dst[t] += src[t];
  }
}

#define NILM_INSTANTIATE(R)                                                    \
  template Tensor<R> relu(const Tensor<R> &);                                  \
  template void relu_backward(Tensor<R> &, const Tensor<R> &);                 \
  template Tensor<R> sigmoid(const Tensor<R> &);                               \
  template void sigmoid_backward(Tensor<R> &, const Tensor<R> &,               \
                                 const Tensor<R> &);                           \
  template Tensor<R> tanh(const Tensor<R> &);                                  \
  template void tanh_backward(Tensor<R> &, const Tensor<R> &,                  \
                              const Tensor<R> &);                              \
  template Tensor<R> add(const Tensor<R> &, const Tensor<R> &);                \
  template void add_backward(Tensor<R> &, Tensor<R> &, const Tensor<R> &);     \
  template Tensor<R> mul(const Tensor<R> &, const Tensor<R> &);                \
  template void mul_backward(Tensor<R> &, Tensor<R> &, const Tensor<R> &);     \
  template Tensor<R> dense_forward(const Tensor<R> &, const DenseParams<R> &); \
  template void dense_backward(Tensor<R> &, DenseParams<R> &,                  \
                               const Tensor<R> &, bool);                       \
  template Tensor<R> crop(const Tensor<R> &, std::size_t, std::size_t,         \
                          std::size_t, std::size_t);                           \
  template void crop_backward(Tensor<R> &, std::size_t, std::size_t,           \
                              const Tensor<R> &);

NILM_INSTANTIATE(float)
NILM_INSTANTIATE(double)

} // namespace nilm
