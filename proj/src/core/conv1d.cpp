// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/conv1d.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace nilm {

namespace {

// Register tile: kOutBlock output channels x kTimeBlock samples. The time
// block is two 512-bit vectors wide for either precision.
template <typename Real> constexpr std::size_t kTimeBlock = 128 / sizeof(Real);
constexpr std::size_t kOutBlock = 8;

struct ConvDims {
  std::size_t cin, cout, m, dil, tin, tout;
};

template <typename Real>
inline void forward_tile_full(const ConvDims &d, const Real *in,
                              const Real *w, const Real *bias, Real *out,
                              std::size_t o0, std::size_t t0) {
  constexpr std::size_t TB = kTimeBlock<Real>;
  Real acc[kOutBlock][TB];
  for (std::size_t oo = 0; oo < kOutBlock; ++oo)
    for (std::size_t tt = 0; tt < TB; ++tt)
      acc[oo][tt] = bias[o0 + oo];
  for (std::size_t i = 0; i < d.cin; ++i) {
    for (std::size_t tau = 0; tau < d.m; ++tau) {
      const Real *src = in + i * d.tin + t0 + tau * d.dil;
      for (std::size_t oo = 0; oo < kOutBlock; ++oo) {
        const Real wv = w[((o0 + oo) * d.cin + i) * d.m + tau];
        for (std::size_t tt = 0; tt < TB; ++tt)
          acc[oo][tt] = std::fma(wv, src[tt], acc[oo][tt]);
      }
    }
  }
  for (std::size_t oo = 0; oo < kOutBlock; ++oo)
    std::copy_n(acc[oo], TB, out + (o0 + oo) * d.tout + t0);
}

template <typename Real>
inline void forward_tile_partial(const ConvDims &d, const Real *in,
                                 const Real *w, const Real *bias, Real *out,
                                 std::size_t o0, std::size_t ob,
                                 std::size_t t0, std::size_t tb) {
  constexpr std::size_t TB = kTimeBlock<Real>;
  Real acc[kOutBlock][TB];
  for (std::size_t oo = 0; oo < ob; ++oo)
    for (std::size_t tt = 0; tt < tb; ++tt)
      acc[oo][tt] = bias[o0 + oo];
  for (std::size_t i = 0; i < d.cin; ++i) {
    for (std::size_t tau = 0; tau < d.m; ++tau) {
      const Real *src = in + i * d.tin + t0 + tau * d.dil;
      for (std::size_t oo = 0; oo < ob; ++oo) {
        const Real wv = w[((o0 + oo) * d.cin + i) * d.m + tau];
        for (std::size_t tt = 0; tt < tb; ++tt)
          acc[oo][tt] = std::fma(wv, src[tt], acc[oo][tt]);
      }
    }
  }
  for (std::size_t oo = 0; oo < ob; ++oo)
    std::copy_n(acc[oo], tb, out + (o0 + oo) * d.tout + t0);
}

// grad_w[o, i, tau] += sum_t grad_out[o, t] * in[i, t + tau*dil]
// The input is transposed to [time, channels] (channels padded to whole
// vectors) so the kernel runs over kGradOut outputs x kGradIn channels,
// broadcasting grad_out and summing over t in registers.
constexpr std::size_t kGradOut = 8;

template <typename Real>
void backward_filters(const ConvDims &d, const Real *in, const Real *gout,
                      Real *gw) {
  constexpr std::size_t V = 64 / sizeof(Real);
  constexpr std::size_t IB = 2 * V;
  const std::size_t cpad = (d.cin + V - 1) / V * V;
  std::vector<Real> xt(d.tin * cpad, Real(0));
  for (std::size_t i = 0; i < d.cin; ++i)
    for (std::size_t t = 0; t < d.tin; ++t)
      xt[t * cpad + i] = in[i * d.tin + t];
  for (std::size_t o0 = 0; o0 < d.cout; o0 += kGradOut) {
    const std::size_t ob = std::min(kGradOut, d.cout - o0);
    for (std::size_t i0 = 0; i0 < cpad; i0 += IB) {
      const std::size_t ib = std::min(IB, cpad - i0);
      for (std::size_t tau = 0; tau < d.m; ++tau) {
        Real acc[kGradOut][IB] = {};
        const Real *x0 = xt.data() + tau * d.dil * cpad + i0;
        if (ob == kGradOut && ib == IB) {
          for (std::size_t t = 0; t < d.tout; ++t) {
            const Real *xr = x0 + t * cpad;
            for (std::size_t oo = 0; oo < kGradOut; ++oo) {
              const Real g = gout[(o0 + oo) * d.tout + t];
              for (std::size_t k = 0; k < IB; ++k)
                acc[oo][k] = std::fma(g, xr[k], acc[oo][k]);
            }
          }
        } else {
          for (std::size_t t = 0; t < d.tout; ++t) {
            const Real *xr = x0 + t * cpad;
            for (std::size_t oo = 0; oo < ob; ++oo) {
              const Real g = gout[(o0 + oo) * d.tout + t];
              for (std::size_t k = 0; k < ib; ++k)
                acc[oo][k] = std::fma(g, xr[k], acc[oo][k]);
            }
          }
        }
        for (std::size_t oo = 0; oo < ob; ++oo)
          for (std::size_t k = 0; k < ib && i0 + k < d.cin; ++k)
            gw[((o0 + oo) * d.cin + i0 + k) * d.m + tau] += acc[oo][k];
      }
    }
  }
}

// Long undilated filters (the CNN's position-wise dense layer) over a few
// output samples: each output is a dot product along tau, reduced in fixed
// vector lanes so its value does not depend on the time extent.
constexpr std::size_t kLongFilter = 32;
constexpr std::size_t kLongTimeBlock = 4;

inline bool use_long_path(const ConvDims &d) {
  return d.dil == 1 && d.m >= kLongFilter;
}

template <typename Real>
void forward_long(const ConvDims &d, const Real *in, const Real *w,
                  const Real *bias, Real *out) {
  constexpr std::size_t V = 64 / sizeof(Real);
  const std::size_t full = d.m - d.m % V;
  for (std::size_t o = 0; o < d.cout; ++o) {
    for (std::size_t t0 = 0; t0 < d.tout; t0 += kLongTimeBlock) {
      const std::size_t tb = std::min(kLongTimeBlock, d.tout - t0);
      Real lanes[kLongTimeBlock][V] = {};
      Real tail[kLongTimeBlock] = {};
      for (std::size_t i = 0; i < d.cin; ++i) {
        const Real *wr = w + (o * d.cin + i) * d.m;
        const Real *xr = in + i * d.tin + t0;
        for (std::size_t tau = 0; tau < full; tau += V)
          for (std::size_t tt = 0; tt < tb; ++tt)
            for (std::size_t k = 0; k < V; ++k)
              lanes[tt][k] = std::fma(wr[tau + k], xr[tt + tau + k], lanes[tt][k]);
        for (std::size_t tt = 0; tt < tb; ++tt)
          for (std::size_t tau = full; tau < d.m; ++tau)
            tail[tt] = std::fma(wr[tau], xr[tt + tau], tail[tt]);
      }
      for (std::size_t tt = 0; tt < tb; ++tt) {
        Real sum = bias[o];
        for (std::size_t k = 0; k < V; ++k)
          sum += lanes[tt][k];
        out[o * d.tout + t0 + tt] = sum + tail[tt];
      }
    }
  }
}

template <typename Real>
void backward_long(const ConvDims &d, const Real *in, const Real *w,
                   const Real *gout, Real *gw, Real *gin) {
  for (std::size_t o = 0; o < d.cout; ++o)
    for (std::size_t i = 0; i < d.cin; ++i) {
      Real *dw = gw + (o * d.cin + i) * d.m;
      const Real *wr = w + (o * d.cin + i) * d.m;
      const Real *xr = in + i * d.tin;
      for (std::size_t t = 0; t < d.tout; ++t) {
        const Real g = gout[o * d.tout + t];
        const Real *x = xr + t;
        for (std::size_t tau = 0; tau < d.m; ++tau)
          dw[tau] = std::fma(g, x[tau], dw[tau]);
        if (gin) {
          Real *dx = gin + i * d.tin + t;
          for (std::size_t tau = 0; tau < d.m; ++tau)
            dx[tau] = std::fma(g, wr[tau], dx[tau]);
        }
      }
    }
}

template <typename Real>
ConvDims check_dims(const Tensor<Real> &input, const Conv1dParams<Real> &p) {
  if (input.rank() != 2)
    throw ShapeError("conv1d: input must be [channels, time], got " +
                     to_string(input.shape()));
  if (p.filters.rank() != 3)
    throw ShapeError("conv1d: filters must be [k_out, k_in, m], got " +
                     to_string(p.filters.shape()));
  if (input.extent(0) != p.in_channels())
    throw ShapeError("conv1d: input has " + std::to_string(input.extent(0)) +
                     " channels but filters expect k_in = " +
                     std::to_string(p.in_channels()));
  require_shape(p.bias.shape(), {p.out_channels()}, "conv1d bias");
  ConvDims d{};
  d.cin = p.in_channels();
  d.cout = p.out_channels();
  d.m = p.length();
  d.dil = p.dilation;
  d.tin = input.extent(1);
  d.tout = conv1d_output_length(d.tin, d.m, d.dil);
  return d;
}

} // namespace

std::size_t conv1d_output_length(std::size_t input_length, std::size_t m,
                                 std::size_t dilation) {
  if (m < 1 || dilation < 1)
    throw ShapeError("conv1d: filter length and dilation must be >= 1");
  const std::size_t span = (m - 1) * dilation;
  if (input_length <= span)
    throw ShapeError("conv1d: input time extent " +
                     std::to_string(input_length) +
                     " must exceed (m-1)*dilation = " + std::to_string(span));
  return input_length - span;
}

template <typename Real>
Conv1dParams<Real>::Conv1dParams(std::size_t k_out, std::size_t k_in,
                                 std::size_t m, std::size_t dilation)
  : filters({k_out, k_in, m}), bias({k_out}), dilation(dilation) {
  if (k_out == 0 || k_in == 0 || m == 0 || dilation == 0)
    throw ShapeError("conv1d: channel counts, m and dilation must be >= 1");
}

template <typename Real>
Tensor<Real> conv1d_forward(const Tensor<Real> &input,
                            const Conv1dParams<Real> &params) {
  const ConvDims d = check_dims(input, params);
  Tensor<Real> out({d.cout, d.tout});
  constexpr std::size_t TB = kTimeBlock<Real>;
  const Real *in = input.data();
  const Real *w = params.filters.data();
  const Real *b = params.bias.data();
  Real *o = out.data();
  if (use_long_path(d)) {
    forward_long(d, in, w, b, o);
    return out;
  }
  for (std::size_t o0 = 0; o0 < d.cout; o0 += kOutBlock) {
    const std::size_t ob = std::min(kOutBlock, d.cout - o0);
    for (std::size_t t0 = 0; t0 < d.tout; t0 += TB) {
      const std::size_t tb = std::min(TB, d.tout - t0);
      if (ob == kOutBlock && tb == TB)
        forward_tile_full(d, in, w, b, o, o0, t0);
      else
        forward_tile_partial(d, in, w, b, o, o0, ob, t0, tb);
    }
  }
  return out;
}

template <typename Real>
void conv1d_backward(Tensor<Real> &input, Conv1dParams<Real> &params,
                     const Tensor<Real> &grad_out, bool propagate) {
  const ConvDims d = check_dims(input, params);
  require_shape(grad_out.shape(), {d.cout, d.tout}, "conv1d_backward grad_out");
  const Real *g = grad_out.data();

  auto gb = params.bias.grad();
  for (std::size_t o = 0; o < d.cout; ++o) {
    Real sum = 0;
    for (std::size_t t = 0; t < d.tout; ++t)
      sum += g[o * d.tout + t];
    gb[o] += sum;
  }
  if (use_long_path(d)) {
    backward_long(d, input.data(), params.filters.data(), g,
                  params.filters.grad().data(),
                  propagate ? input.grad().data() : nullptr);
    return;
  }
  backward_filters(d, input.data(), g, params.filters.grad().data());
  if (!propagate)
    return;
  // grad_in is the full correlation of grad_out with the flipped,
  // transposed filters: run it as a forward pass over zero-padded grad_out.
  const std::size_t pad = (d.m - 1) * d.dil;
  Tensor<Real> padded({d.cout, d.tout + 2 * pad});
  for (std::size_t o = 0; o < d.cout; ++o)
    std::copy_n(g + o * d.tout, d.tout, padded.data() + o * (d.tout + 2 * pad) + pad);
  Conv1dParams<Real> flipped(d.cin, d.cout, d.m, d.dil);
  for (std::size_t o = 0; o < d.cout; ++o)
    for (std::size_t i = 0; i < d.cin; ++i)
      for (std::size_t tau = 0; tau < d.m; ++tau)
        flipped.filters.at(i, o, d.m - 1 - tau) = params.filters.at(o, i, tau);
  const Tensor<Real> gin = conv1d_forward(padded, flipped);
  auto dst = input.grad();
  for (std::size_t k = 0; k < gin.size(); ++k)
    dst[k] += gin[k];
}

template struct Conv1dParams<float>;
template struct Conv1dParams<double>;
template Tensor<float> conv1d_forward(const Tensor<float> &,
                                      const Conv1dParams<float> &);
template Tensor<double> conv1d_forward(const Tensor<double> &,
                                       const Conv1dParams<double> &);
template void conv1d_backward(Tensor<float> &, Conv1dParams<float> &,
                              const Tensor<float> &, bool);
template void conv1d_backward(Tensor<double> &, Conv1dParams<double> &,
                              const Tensor<double> &, bool);

} // namespace nilm
