// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/gru.hpp>

#include <cmath>

namespace nilm {

namespace {

template <typename Real> Real logistic(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

// y = A x + y, A is [rows, cols] row-major.
template <typename Real>
void matvec_acc(const Real *A, std::size_t rows, std::size_t cols,
                const Real *x, Real *y) {
  for (std::size_t o = 0; o < rows; ++o) {
    const Real *a = A + o * cols;
    Real acc = y[o];
    for (std::size_t i = 0; i < cols; ++i)
      acc = std::fma(a[i], x[i], acc);
    y[o] = acc;
  }
}

// y += A^T x, A is [rows, cols].
template <typename Real>
void matvec_t_acc(const Real *A, std::size_t rows, std::size_t cols,
                  const Real *x, Real *y) {
  for (std::size_t o = 0; o < rows; ++o) {
    const Real xo = x[o];
    if (xo == Real(0))
      continue;
    const Real *a = A + o * cols;
    for (std::size_t i = 0; i < cols; ++i)
      y[i] += a[i] * xo;
  }
}

// G += u v^T, G is [rows, cols].
template <typename Real>
void outer_acc(Real *G, std::size_t rows, std::size_t cols, const Real *u,
               const Real *v) {
  for (std::size_t o = 0; o < rows; ++o) {
    const Real uo = u[o];
    if (uo == Real(0))
      continue;
    Real *g = G + o * cols;
    for (std::size_t i = 0; i < cols; ++i)
      g[i] += uo * v[i];
  }
}

inline std::size_t step_index(std::size_t step, std::size_t T, Direction d) {
  return d == Direction::forward ? step : T - 1 - step;
}

} // namespace

template <typename Real>
GruCellParams<Real>::GruCellParams(std::size_t hidden, std::size_t input)
  : W_r({hidden, input}), W_z({hidden, input}), W({hidden, input}),
    U_r({hidden, hidden}), U_z({hidden, hidden}), U({hidden, hidden}),
    b_r({hidden}), b_z({hidden}), b({hidden}) {}

template <typename Real> void GruCellParams<Real>::validate() const {
  if (U.rank() != 2 || W.rank() != 2)
    throw ShapeError("gru: transforms must be rank 2");
  const std::size_t H = U.extent(0), I = W.extent(1);
  for (const auto *t : {&W_r, &W_z, &W})
    require_shape(t->shape(), {H, I}, "gru input transform");
  for (const auto *t : {&U_r, &U_z, &U})
    require_shape(t->shape(), {H, H}, "gru recurrent transform");
  for (const auto *t : {&b_r, &b_z, &b})
    require_shape(t->shape(), {H}, "gru bias");
}

template <typename Real>
Tensor<Real> gru_forward(const Tensor<Real> &inputs, const Tensor<Real> &h0,
                         const GruCellParams<Real> &p, Direction direction,
                         GruCache<Real> *cache) {
  p.validate();
  const std::size_t H = p.hidden_size(), I = p.input_size();
  if (inputs.rank() != 2 || inputs.extent(1) != I)
    throw ShapeError("gru_forward: inputs must be [T, " + std::to_string(I) +
                     "], got " + to_string(inputs.shape()));
  require_shape(h0.shape(), {H}, "gru_forward h0");
  const std::size_t T = inputs.extent(0);
  Tensor<Real> out({T, H});
  if (cache) {
    cache->reset.assign(T * H, Real(0));
    cache->update.assign(T * H, Real(0));
    cache->candidate.assign(T * H, Real(0));
    cache->h_prev.assign(T * H, Real(0));
  }
  std::vector<Real> h(h0.values().begin(), h0.values().end());
  std::vector<Real> ar(H), az(H), ac(H), rh(H);
  for (std::size_t step = 0; step < T; ++step) {
    const std::size_t t = step_index(step, T, direction);
    const Real *x = inputs.data() + t * I;
    for (std::size_t k = 0; k < H; ++k) {
      ar[k] = p.b_r[k];
      az[k] = p.b_z[k];
      ac[k] = p.b[k];
    }
    matvec_acc(p.W_r.data(), H, I, x, ar.data());
    matvec_acc(p.U_r.data(), H, H, h.data(), ar.data());
    matvec_acc(p.W_z.data(), H, I, x, az.data());
    matvec_acc(p.U_z.data(), H, H, h.data(), az.data());
    for (std::size_t k = 0; k < H; ++k) {
      ar[k] = logistic(ar[k]);
      az[k] = logistic(az[k]);
      rh[k] = ar[k] * h[k];
    }
    matvec_acc(p.W.data(), H, I, x, ac.data());
    matvec_acc(p.U.data(), H, H, rh.data(), ac.data());
    if (cache) {
      std::copy(h.begin(), h.end(), cache->h_prev.begin() + step * H);
      std::copy(ar.begin(), ar.end(), cache->reset.begin() + step * H);
      std::copy(az.begin(), az.end(), cache->update.begin() + step * H);
    }
    Real *o = out.data() + t * H;
    for (std::size_t k = 0; k < H; ++k) {
      const Real c = std::tanh(ac[k]);
      if (cache)
        cache->candidate[step * H + k] = c;
      h[k] = az[k] * h[k] + (Real(1) - az[k]) * c;
      o[k] = h[k];
    }
  }
  return out;
}

template <typename Real>
void gru_backward(Tensor<Real> &inputs, Tensor<Real> &h0,
                  GruCellParams<Real> &p, Direction direction,
                  const GruCache<Real> &cache, const Tensor<Real> &grad_out,
                  bool propagate) {
  p.validate();
  const std::size_t H = p.hidden_size(), I = p.input_size();
  const std::size_t T = inputs.extent(0);
  require_shape(grad_out.shape(), {T, H}, "gru_backward grad_out");
  require_shape(h0.shape(), {H}, "gru_backward h0");
  if (cache.reset.size() != T * H)
    throw ShapeError("gru_backward: cache does not match a sequence of " +
                     std::to_string(T) + " steps");

  auto gWr = p.W_r.grad(), gWz = p.W_z.grad(), gW = p.W.grad();
  auto gUr = p.U_r.grad(), gUz = p.U_z.grad(), gU = p.U.grad();
  auto gbr = p.b_r.grad(), gbz = p.b_z.grad(), gb = p.b.grad();
  Real *gx = propagate ? inputs.grad().data() : nullptr;

  std::vector<Real> dh(H, Real(0)), dh_prev(H), dar(H), daz(H), dac(H),
    drh(H), rh(H);
  for (std::size_t step = T; step-- > 0;) {
    const std::size_t t = step_index(step, T, direction);
    const Real *x = inputs.data() + t * I;
    const Real *r = cache.reset.data() + step * H;
    const Real *z = cache.update.data() + step * H;
    const Real *c = cache.candidate.data() + step * H;
    const Real *hp = cache.h_prev.data() + step * H;
    const Real *go = grad_out.data() + t * H;

    for (std::size_t k = 0; k < H; ++k) {
      const Real g = dh[k] + go[k];
      dh_prev[k] = g * z[k];
      daz[k] = g * (hp[k] - c[k]) * z[k] * (Real(1) - z[k]);
      dac[k] = g * (Real(1) - z[k]) * (Real(1) - c[k] * c[k]);
      rh[k] = r[k] * hp[k];
      drh[k] = Real(0);
    }
    // candidate path
    matvec_t_acc(p.U.data(), H, H, dac.data(), drh.data());
    for (std::size_t k = 0; k < H; ++k) {
      dar[k] = drh[k] * hp[k] * r[k] * (Real(1) - r[k]);
      dh_prev[k] += drh[k] * r[k];
    }
    outer_acc(gU.data(), H, H, dac.data(), rh.data());
    outer_acc(gUz.data(), H, H, daz.data(), hp);
    outer_acc(gUr.data(), H, H, dar.data(), hp);
    outer_acc(gW.data(), H, I, dac.data(), x);
    outer_acc(gWz.data(), H, I, daz.data(), x);
    outer_acc(gWr.data(), H, I, dar.data(), x);
    for (std::size_t k = 0; k < H; ++k) {
      gb[k] += dac[k];
      gbz[k] += daz[k];
      gbr[k] += dar[k];
    }
    matvec_t_acc(p.U_z.data(), H, H, daz.data(), dh_prev.data());
    matvec_t_acc(p.U_r.data(), H, H, dar.data(), dh_prev.data());
    if (gx) {
      Real *gxt = gx + t * I;
      matvec_t_acc(p.W.data(), H, I, dac.data(), gxt);
      matvec_t_acc(p.W_z.data(), H, I, daz.data(), gxt);
      matvec_t_acc(p.W_r.data(), H, I, dar.data(), gxt);
    }
    dh.swap(dh_prev);
  }
  auto gh0 = h0.grad();
  for (std::size_t k = 0; k < H; ++k)
    gh0[k] += dh[k];
}

template struct GruCellParams<float>;
template struct GruCellParams<double>;
template Tensor<float> gru_forward(const Tensor<float> &, const Tensor<float> &,
                                   const GruCellParams<float> &, Direction,
                                   GruCache<float> *);
template Tensor<double> gru_forward(const Tensor<double> &,
                                    const Tensor<double> &,
                                    const GruCellParams<double> &, Direction,
                                    GruCache<double> *);
template void gru_backward(Tensor<float> &, Tensor<float> &,
                           GruCellParams<float> &, Direction,
                           const GruCache<float> &, const Tensor<float> &,
                           bool);
template void gru_backward(Tensor<double> &, Tensor<double> &,
                           GruCellParams<double> &, Direction,
                           const GruCache<double> &, const Tensor<double> &,
                           bool);

} // namespace nilm
