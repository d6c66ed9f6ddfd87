// SPDX-License-Identifier: Apache-2.0
#include "gradcheck.hpp"

#include <nilm/core/conv1d.hpp>
#include <nilm/core/loss.hpp>
#include <nilm/core/ops.hpp>

#include <algorithm>
#include <cmath>

namespace nilm::testing {

double relative_error(std::span<const double> analytic,
                      std::span<const double> numeric) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double scale = std::sqrt(std::max(na, nn));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

std::vector<double> numeric_gradient(std::span<double> values,
                                     const std::function<double()> &objective,
                                     double h) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = objective();
    values[i] = saved - h;
    const double down = objective();
    values[i] = saved;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

void fill_uniform(Tensor<double> &t, CounterRng &rng, double lo, double hi) {
  for (auto &v : t.values())
    v = rng.uniform(lo, hi);
}

void fill_away_from_zero(Tensor<double> &t, CounterRng &rng, double lo,
                         double hi) {
  for (auto &v : t.values()) {
    const double m = rng.uniform(lo, hi);
    v = rng.uniform() < 0.5 ? -m : m;
  }
}

namespace {

double dot(const Tensor<double> &a, const Tensor<double> &b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

/// Worst error over the listed tensors, whose grads must already hold the
/// analytic result of d(objective)/d(tensor).
double compare(std::initializer_list<Tensor<double> *> tensors,
               const std::function<double()> &objective) {
  double worst = 0;
  for (auto *t : tensors) {
    const std::vector<double> analytic(t->grad().begin(), t->grad().end());
    const auto numeric = numeric_gradient(t->values(), objective);
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return worst;
}

Tensor<double> random_like(const Shape &shape, CounterRng &rng) {
  Tensor<double> t(shape);
  fill_uniform(t, rng);
  return t;
}

} // namespace

GradReport check_conv1d(std::size_t dilation, std::size_t instances,
                        std::uint64_t seed) {
  GradReport rep{"conv1d dilation " + std::to_string(dilation), instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    const std::size_t k_in = 1 + rng.below(3), k_out = 1 + rng.below(3);
    const std::size_t m = 1 + rng.below(3);
    const std::size_t T = (m - 1) * dilation + 1 + rng.below(8);
    Tensor<double> x = random_like({k_in, T}, rng);
    Conv1dParams<double> p(k_out, k_in, m, dilation);
    fill_uniform(p.filters, rng);
    fill_uniform(p.bias, rng);
    const auto w = random_like(conv1d_forward(x, p).shape(), rng);
    conv1d_backward(x, p, w);
    rep.worst = std::max(rep.worst, compare({&x, &p.filters, &p.bias}, [&] {
      return dot(conv1d_forward(x, p), w);
    }));
  }
  return rep;
}

GradReport check_gru(Direction direction, std::size_t instances,
                     std::uint64_t seed) {
  GradReport rep{direction == Direction::forward ? "gru forward direction"
                                                 : "gru backward direction",
                 instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    const std::size_t H = 1 + rng.below(4), I = 1 + rng.below(3);
    const std::size_t T = 1 + rng.below(6);
    GruCellParams<double> p(H, I);
    for (auto *t : {&p.W_r, &p.W_z, &p.W, &p.U_r, &p.U_z, &p.U, &p.b_r,
                    &p.b_z, &p.b})
      fill_uniform(*t, rng);
    Tensor<double> x = random_like({T, I}, rng);
    Tensor<double> h0 = random_like({H}, rng);
    const auto w = random_like({T, H}, rng);
    GruCache<double> cache;
    gru_forward(x, h0, p, direction, &cache);
    gru_backward(x, h0, p, direction, cache, w);
    rep.worst = std::max(
      rep.worst, compare({&x, &h0, &p.W_r, &p.W_z, &p.W, &p.U_r, &p.U_z, &p.U,
                          &p.b_r, &p.b_z, &p.b},
                         [&] { return dot(gru_forward(x, h0, p, direction), w); }));
  }
  return rep;
}

GradReport check_dense(std::size_t instances, std::uint64_t seed) {
  GradReport rep{"dense", instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    const std::size_t rows = 1 + rng.below(4), in = 1 + rng.below(5),
                      out = 1 + rng.below(4);
    Tensor<double> x = random_like({rows, in}, rng);
    DenseParams<double> p(out, in);
    fill_uniform(p.weight, rng);
    fill_uniform(p.bias, rng);
    const auto w = random_like({rows, out}, rng);
    dense_backward(x, p, w);
    rep.worst = std::max(rep.worst, compare({&x, &p.weight, &p.bias}, [&] {
      return dot(dense_forward(x, p), w);
    }));
  }
  return rep;
}

namespace {

template <typename Fwd, typename Bwd>
GradReport check_unary(const std::string &name, std::size_t instances,
                       std::uint64_t seed, Fwd fwd, Bwd bwd, double lo,
                       double hi) {
  GradReport rep{name, instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    Tensor<double> x({1 + rng.below(3), 1 + rng.below(8)});
    fill_away_from_zero(x, rng, lo, hi);
    const auto w = random_like(x.shape(), rng);
    bwd(x, fwd(x), w);
    rep.worst = std::max(rep.worst,
                         compare({&x}, [&] { return dot(fwd(x), w); }));
  }
  return rep;
}

} // namespace

GradReport check_relu(std::size_t instances, std::uint64_t seed) {
  return check_unary(
    "relu", instances, seed, [](const Tensor<double> &x) { return relu(x); },
    [](Tensor<double> &x, const Tensor<double> &, const Tensor<double> &g) {
      relu_backward(x, g);
    },
    0.01, 2.0);
}

GradReport check_sigmoid(std::size_t instances, std::uint64_t seed) {
  return check_unary(
    "sigmoid", instances, seed,
    [](const Tensor<double> &x) { return sigmoid(x); },
    [](Tensor<double> &x, const Tensor<double> &y, const Tensor<double> &g) {
      sigmoid_backward(x, y, g);
    },
    0.0, 4.0);
}

GradReport check_tanh(std::size_t instances, std::uint64_t seed) {
  return check_unary(
    "tanh", instances, seed, [](const Tensor<double> &x) { return tanh(x); },
    [](Tensor<double> &x, const Tensor<double> &y, const Tensor<double> &g) {
      tanh_backward(x, y, g);
    },
    0.0, 3.0);
}

GradReport check_add(std::size_t instances, std::uint64_t seed) {
  GradReport rep{"add", instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    const Shape shape{1 + rng.below(3), 1 + rng.below(6)};
    Tensor<double> a = random_like(shape, rng), b = random_like(shape, rng);
    const auto w = random_like(shape, rng);
    add_backward(a, b, w);
    rep.worst = std::max(rep.worst,
                         compare({&a, &b}, [&] { return dot(add(a, b), w); }));
  }
  return rep;
}

GradReport check_mul(std::size_t instances, std::uint64_t seed) {
  GradReport rep{"mul", instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    const Shape shape{1 + rng.below(3), 1 + rng.below(6)};
    Tensor<double> a = random_like(shape, rng), b = random_like(shape, rng);
    const auto w = random_like(shape, rng);
    mul_backward(a, b, w);
    rep.worst = std::max(rep.worst,
                         compare({&a, &b}, [&] { return dot(mul(a, b), w); }));
  }
  return rep;
}

GradReport check_crop(std::size_t instances, std::uint64_t seed) {
  GradReport rep{"crop", instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    const std::size_t C = 1 + rng.below(4), T = 1 + rng.below(8);
    Tensor<double> x = random_like({C, T}, rng);
    const std::size_t c0 = rng.below(C), t0 = rng.below(T);
    const std::size_t ch = 1 + rng.below(C - c0), len = 1 + rng.below(T - t0);
    const auto w = random_like({ch, len}, rng);
    crop_backward(x, c0, t0, w);
    rep.worst = std::max(rep.worst, compare({&x}, [&] {
      return dot(crop(x, c0, ch, t0, len), w);
    }));
  }
  return rep;
}

GradReport check_mae(std::size_t instances, std::uint64_t seed) {
  GradReport rep{"mae loss", instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    const std::size_t r = 1 + rng.below(12);
    Tensor<double> target = random_like({r}, rng);
    Tensor<double> pred({r});
    // Offsets of at least 0.01 keep every coordinate away from the kink.
    fill_away_from_zero(pred, rng, 0.01, 1.0);
    for (std::size_t i = 0; i < r; ++i)
      pred[i] += target[i];
    const auto res = mae_loss<double>(pred.values(), target.values());
    const auto numeric = numeric_gradient(pred.values(), [&] {
      return mae_loss<double>(pred.values(), target.values()).value;
    });
    rep.worst = std::max(rep.worst, relative_error(res.grad, numeric));
  }
  return rep;
}

GradReport check_bce(std::size_t instances, std::uint64_t seed) {
  GradReport rep{"bce loss", instances, 0};
  for (std::size_t k = 0; k < instances; ++k) {
    CounterRng rng(derive_seed(seed, k));
    const std::size_t r = 1 + rng.below(12);
    Tensor<double> prob({r}), target({r});
    for (std::size_t i = 0; i < r; ++i) {
      prob[i] = rng.uniform(0.02, 0.98);
      target[i] = rng.below(2) ? 1.0 : 0.0;
    }
    const auto res = bce_loss<double>(prob.values(), target.values());
    const auto numeric = numeric_gradient(prob.values(), [&] {
      return bce_loss<double>(prob.values(), target.values()).value;
    });
    rep.worst = std::max(rep.worst, relative_error(res.grad, numeric));
  }
  return rep;
}

std::vector<GradReport> gradient_suite(std::size_t instances,
                                       std::uint64_t seed) {
  std::vector<GradReport> out;
  std::uint64_t s = 0;
  for (std::size_t d : {1, 2, 4, 8})
    out.push_back(check_conv1d(d, instances, derive_seed(seed, s++)));
  out.push_back(check_gru(Direction::forward, instances, derive_seed(seed, s++)));
  out.push_back(check_gru(Direction::backward, instances, derive_seed(seed, s++)));
  out.push_back(check_dense(instances, derive_seed(seed, s++)));
  out.push_back(check_relu(instances, derive_seed(seed, s++)));
  out.push_back(check_sigmoid(instances, derive_seed(seed, s++)));
  out.push_back(check_tanh(instances, derive_seed(seed, s++)));
  out.push_back(check_add(instances, derive_seed(seed, s++)));
  out.push_back(check_mul(instances, derive_seed(seed, s++)));
  out.push_back(check_crop(instances, derive_seed(seed, s++)));
  out.push_back(check_mae(instances, derive_seed(seed, s++)));
  out.push_back(check_bce(instances, derive_seed(seed, s++)));
  return out;
}

} // namespace nilm::testing
