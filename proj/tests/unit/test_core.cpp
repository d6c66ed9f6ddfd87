// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "../support/gradcheck.hpp"

#include <nilm/core/adam.hpp>
#include <nilm/core/conv1d.hpp>
#include <nilm/core/gru.hpp>
#include <nilm/core/loss.hpp>
#include <nilm/core/ops.hpp>

#include <cmath>

using namespace nilm;
using nilm::testing::fill_uniform;

namespace {

// Direct triple loop, written independently of the tiled kernel.
Tensor<double> conv_oracle(const Tensor<double> &in, const Conv1dParams<double> &p) {
  const std::size_t K_out = p.filters.extent(0), K_in = p.filters.extent(1),
                    m = p.filters.extent(2), d = p.dilation;
  const std::size_t T = in.extent(1) - (m - 1) * d;
  Tensor<double> out({K_out, T});
  for (std::size_t o = 0; o < K_out; ++o)
    for (std::size_t t = 0; t < T; ++t) {
      double s = p.bias[o];
      for (std::size_t i = 0; i < K_in; ++i)
        for (std::size_t tau = 0; tau < m; ++tau)
          s += in.at(i, t + tau * d) * p.filters.at(o, i, tau);
      out.at(o, t) = s;
    }
  return out;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One scalar time step at a time, straight from the gate equations.
std::vector<double> gru_oracle(const Tensor<double> &x, const Tensor<double> &h0,
                               const GruCellParams<double> &p, bool reverse) {
  const std::size_t T = x.extent(0), I = x.extent(1), H = h0.size();
  std::vector<double> out(T * H), h(h0.values().begin(), h0.values().end());
  for (std::size_t step = 0; step < T; ++step) {
    const std::size_t t = reverse ? T - 1 - step : step;
    std::vector<double> r(H), z(H), c(H), next(H);
    for (std::size_t j = 0; j < H; ++j) {
      double ar = p.b_r[j], az = p.b_z[j];
      for (std::size_t i = 0; i < I; ++i) {
        ar += p.W_r.at(j, i) * x.at(t, i);
        az += p.W_z.at(j, i) * x.at(t, i);
      }
      for (std::size_t k = 0; k < H; ++k) {
        ar += p.U_r.at(j, k) * h[k];
        az += p.U_z.at(j, k) * h[k];
      }
      r[j] = logistic(ar);
      z[j] = logistic(az);
    }
    for (std::size_t j = 0; j < H; ++j) {
      double a = p.b[j];
      for (std::size_t i = 0; i < I; ++i)
        a += p.W.at(j, i) * x.at(t, i);
      for (std::size_t k = 0; k < H; ++k)
        a += p.U.at(j, k) * r[k] * h[k];
      c[j] = std::tanh(a);
      next[j] = z[j] * h[j] + (1 - z[j]) * c[j];
    }
    h = next;
    for (std::size_t j = 0; j < H; ++j)
      out[t * H + j] = h[j];
  }
  return out;
}

GruCellParams<double> random_gru(std::size_t H, std::size_t I, CounterRng &rng) {
  GruCellParams<double> p(H, I);
  for (auto *t : {&p.W_r, &p.W_z, &p.W, &p.U_r, &p.U_z, &p.U, &p.b_r, &p.b_z, &p.b})
    fill_uniform(*t, rng);
  return p;
}

} // namespace

TEST_CASE("conv1d examples") {
  Conv1dParams<double> p(1, 1, 3);
  p.filters.values()[1] = 1.0;
  Tensor<double> x({1, 3}, {1, 2, 3});
  auto y = conv1d_forward(x, p);
  CHECK(y.shape() == Shape{1, 1});
  CHECK(y[0] == 2.0);

  Conv1dParams<double> q(1, 1, 3, 2);
  q.filters.values()[0] = 1.0;
  q.filters.values()[2] = 1.0;
  Tensor<double> x2({1, 5}, {1, 0, 0, 0, 2});
  CHECK(conv1d_forward(x2, q)[0] == 3.0);
}

TEST_CASE("conv1d matches a direct loop oracle") {
  CounterRng rng(11);
  for (std::size_t d : {1, 2, 4}) {
    Tensor<double> x({2, 40});
    fill_uniform(x, rng);
    Conv1dParams<double> p(3, 2, 3, d);
    fill_uniform(p.filters, rng);
    fill_uniform(p.bias, rng);
    const auto y = conv1d_forward(x, p);
    const auto ref = conv_oracle(x, p);
    REQUIRE(y.shape() == ref.shape());
    CHECK(y.extent(1) == 40 - 2 * d);
    for (std::size_t i = 0; i < y.size(); ++i)
      CHECK(std::abs(y[i] - ref[i]) < 1e-10);
  }
  // Wide case exercising the full register tiles.
  Tensor<double> x({16, 300});
  fill_uniform(x, rng);
  Conv1dParams<double> p(20, 16, 3, 8);
  fill_uniform(p.filters, rng);
  fill_uniform(p.bias, rng);
  const auto y = conv1d_forward(x, p);
  const auto ref = conv_oracle(x, p);
  double worst = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    worst = std::max(worst, std::abs(y[i] - ref[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("long undilated filters match the oracle and finite differences") {
  CounterRng rng(21);
  Tensor<double> x({3, 60});
  fill_uniform(x, rng);
  Conv1dParams<double> p(5, 3, 53);
  fill_uniform(p.filters, rng);
  fill_uniform(p.bias, rng);
  const auto y = conv1d_forward(x, p);
  const auto ref = conv_oracle(x, p);
  REQUIRE(y.shape() == ref.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    CHECK(std::abs(y[i] - ref[i]) < 1e-10);

  Tensor<double> w(y.shape());
  fill_uniform(w, rng);
  conv1d_backward(x, p, w);
  auto objective = [&] {
    const auto out = conv1d_forward(x, p);
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i)
      s += out[i] * w[i];
    return s;
  };
  for (auto *t : {&x, &p.filters, &p.bias}) {
    const std::vector<double> analytic(t->grad().begin(), t->grad().end());
    const auto numeric = nilm::testing::numeric_gradient(t->values(), objective);
    CHECK(nilm::testing::relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("conv1d errors and shrinkage") {
  Conv1dParams<double> p(2, 3, 3, 4);
  Tensor<double> wrong({2, 20});
  CHECK_THROWS_AS(conv1d_forward(wrong, p), ShapeError);
  Tensor<double> short_in({3, 8});
  CHECK_THROWS_AS(conv1d_forward(short_in, p), ShapeError);
  Tensor<double> ok({3, 9});
  CHECK(conv1d_forward(ok, p).extent(1) == 1);
}

TEST_CASE("conv1d backward trivial cases") {
  CounterRng rng(3);
  Tensor<double> x({2, 10});
  fill_uniform(x, rng);
  Conv1dParams<double> p(2, 2, 3, 2);
  fill_uniform(p.filters, rng);
  conv1d_backward(x, p, Tensor<double>({2, 6}));
  for (double g : x.grad())
    CHECK(g == 0.0);
  for (double g : p.filters.grad())
    CHECK(g == 0.0);

  Tensor<double> s({1, 5}, {1, 2, 3, 4, 5});
  Conv1dParams<double> one(1, 1, 1);
  Tensor<double> g({1, 5}, {1, -1, 2, 0, 1});
  conv1d_backward(s, one, g);
  CHECK(one.filters.grad()[0] == doctest::Approx(1 - 2 + 6 + 0 + 5));
  // Accumulates rather than overwrites.
  conv1d_backward(s, one, g);
  CHECK(one.filters.grad()[0] == doctest::Approx(20));
}

TEST_CASE("gru closed form with zero parameters") {
  GruCellParams<double> p(3, 2);
  Tensor<double> x({5, 2});
  Tensor<double> h0({3}, {2, 2, 2});
  const auto h = gru_forward(x, h0, p);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(h.at(t, j) == doctest::Approx(2 * std::pow(0.5, double(t + 1))));
  Tensor<double> empty({0, 2});
  CHECK(gru_forward(empty, h0, p).size() == 0);
}

TEST_CASE("gru matches a per-timestep oracle in both directions") {
  CounterRng rng(5);
  auto p = random_gru(4, 3, rng);
  Tensor<double> x({7, 3}), h0({4});
  fill_uniform(x, rng);
  fill_uniform(h0, rng);
  for (bool rev : {false, true}) {
    const auto h = gru_forward(x, h0, p, rev ? Direction::backward : Direction::forward);
    const auto ref = gru_oracle(x, h0, p, rev);
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(std::abs(h[i] - ref[i]) < 1e-12);
  }
  // backward == reverse(forward(reverse(x)))
  Tensor<double> xr({7, 3});
  for (std::size_t t = 0; t < 7; ++t)
    for (std::size_t i = 0; i < 3; ++i)
      xr.at(t, i) = x.at(6 - t, i);
  const auto fwd = gru_forward(xr, h0, p, Direction::forward);
  const auto bwd = gru_forward(x, h0, p, Direction::backward);
  for (std::size_t t = 0; t < 7; ++t)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(bwd.at(t, j) == fwd.at(6 - t, j));
}

TEST_CASE("gru single step gradients match hand derivation") {
  CounterRng rng(8);
  auto p = random_gru(2, 2, rng);
  Tensor<double> x({1, 2}), h0({2});
  fill_uniform(x, rng);
  fill_uniform(h0, rng);
  GruCache<double> cache;
  gru_forward(x, h0, p, Direction::forward, &cache);
  Tensor<double> g({1, 2}, {1.0, 0.0});
  gru_backward(x, h0, p, Direction::forward, cache, g);
  // dh/db_z[0] = (h0 - c) * z (1 - z) for unit 0; dh/db[0] = (1 - z)(1 - c^2).
  const double z = cache.update[0], c = cache.candidate[0];
  CHECK(p.b_z.grad()[0] == doctest::Approx((h0[0] - c) * z * (1 - z)).epsilon(1e-12));
  CHECK(p.b.grad()[0] == doctest::Approx((1 - z) * (1 - c * c)).epsilon(1e-12));
  CHECK(p.b_z.grad()[1] == 0.0);
}

TEST_CASE("gru zero upstream gradient gives zero gradients") {
  CounterRng rng(9);
  auto p = random_gru(3, 2, rng);
  Tensor<double> x({4, 2}), h0({3});
  fill_uniform(x, rng);
  GruCache<double> cache;
  gru_forward(x, h0, p, Direction::forward, &cache);
  gru_backward(x, h0, p, Direction::forward, cache, Tensor<double>({4, 3}));
  for (auto *t : {&p.W_r, &p.U, &p.b})
    for (double g : t->grad())
      CHECK(g == 0.0);
}

TEST_CASE("activations") {
  Tensor<double> x({1, 3}, {0.0, -2.0, 50.0});
  const auto s = sigmoid(x);
  CHECK(s[0] == 0.5);
  CHECK(s[2] == 1.0 - kSigmoidClamp);
  CHECK(relu(x)[1] == 0.0);
  CHECK(nilm::tanh(x)[0] == 0.0);
}

TEST_CASE("losses") {
  std::vector<double> a{0, 0}, b{2, 4};
  CHECK(mae_loss<double>(a, b).value == 3.0);
  CHECK(mae_loss<double>(b, b).value == 0.0);
  CHECK(mae_loss<double>(b, b).grad == std::vector<double>{0, 0});
  const auto g = mae_loss<double>(std::vector<double>{1, 5}, std::vector<double>{2, 4});
  CHECK(g.grad == std::vector<double>{-0.5, 0.5});

  std::vector<double> half(4, 0.5), tgt{0, 1, 1, 0};
  CHECK(bce_loss<double>(half, tgt).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  std::vector<double> sure{0.0, 1.0};
  const double floor = bce_loss<double>(sure, std::vector<double>{0, 1}).value;
  CHECK(floor > 0.0);
  CHECK(floor < 1e-6);
  CHECK_THROWS_AS(bce_loss<double>(half, std::vector<double>{0, 0.5, 1, 0}),
                  std::invalid_argument);
}

TEST_CASE("adam first step and zero gradient") {
  Tensor<double> w({3}, {1.0, -2.0, 0.5});
  auto g = w.grad();
  g[0] = 0.3;
  g[1] = -4.0;
  g[2] = 0.0;
  AdamState<double> st;
  Tensor<double> *ps[] = {&w};
  adam_step<double>(ps, st);
  CHECK(st.step == 1);
  CHECK(w[0] == doctest::Approx(1.0 - 0.001).epsilon(1e-6));
  CHECK(w[1] == doctest::Approx(-2.0 + 0.001).epsilon(1e-6));
  CHECK(w[2] == 0.5);
}

TEST_CASE("adam matches a scalar reference on a quadratic") {
  // f(w) = (w - 3)^2, three steps.
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double w_ref = 0.0, m = 0.0, v = 0.0;
  Tensor<double> w({1}, {0.0});
  AdamState<double> st(AdamOptions{lr, b1, b2, eps});
  Tensor<double> *ps[] = {&w};
  for (int t = 1; t <= 3; ++t) {
    const double g_ref = 2 * (w_ref - 3);
    m = b1 * m + (1 - b1) * g_ref;
    v = b2 * v + (1 - b2) * g_ref * g_ref;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    w_ref -= lr * mh / (std::sqrt(vh) + eps);

    w.zero_grad();
    w.grad()[0] = 2 * (w[0] - 3);
    adam_step<double>(ps, st);
    CHECK(std::abs(w[0] - w_ref) < 1e-12);
  }
}

TEST_CASE("gradient suite, reduced instance count") {
  for (const auto &rep : nilm::testing::gradient_suite(5, 1234)) {
    INFO(rep.op);
    CHECK(rep.worst < 1e-4);
  }
}

TEST_CASE("forward passes are repeatable bit for bit") {
  CounterRng rng(1);
  Tensor<double> x({4, 100});
  fill_uniform(x, rng);
  Conv1dParams<double> p(8, 4, 3, 4);
  fill_uniform(p.filters, rng);
  const auto a = conv1d_forward(x, p), b = conv1d_forward(x, p);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}
