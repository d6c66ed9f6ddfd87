// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "../support/gradcheck.hpp"
#include "../support/model_checks.hpp"

#include <nilm/core/rng.hpp>
#include <nilm/data/container.hpp>
#include <nilm/model/serialize.hpp>

#include <cmath>
#include <cstring>

using namespace nilm;
using namespace nilm::testing;

namespace {

ModelConfig small_config(Family f, std::size_t L, std::size_t r) {
  ModelConfig c;
  c.family = f;
  c.receptive_field = L;
  c.target_field = r;
  c.layers = f == Family::wavenet ? wavenet_layers_for(L) : 6;
  c.residual_channels = 4;
  c.skip_channels = 6;
  c.hidden_size = 3;
  c.rnn_layers = 2;
  c.cnn_dense_units = 8;
  c.cnn_filters = {{3, 5}, {3, 4}, {4, 3}, {4, 3}, {4, 3}};
  return c;
}

} // namespace

TEST_CASE("receptive field arithmetic") {
  CHECK(wavenet_receptive_field(3) == 15);
  CHECK(wavenet_receptive_field(6) == 127);
  CHECK(wavenet_receptive_field(10) == 2047);
  CHECK(wavenet_layers_for(31) == 4);
  CHECK_THROWS_AS(wavenet_layers_for(33), ConfigError);
}

TEST_CASE("config validation") {
  auto c = wavenet_config(4, 10);
  CHECK(c.receptive_field == 31);
  CHECK(c.window_length() == 40);
  CHECK(c.target_offset() == 15);
  c.receptive_field = 33;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = wavenet_config(4, 0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  ModelConfig even;
  even.family = Family::cnn;
  even.receptive_field = 30;
  CHECK_THROWS_AS(even.validate(), ConfigError);
}

TEST_CASE("config text round trip") {
  auto c = small_config(Family::cnn, 31, 10);
  c.head = Head::classification;
  c.seed = 99;
  CHECK(ModelConfig::from_text(c.to_text()) == c);
  CHECK_THROWS_AS(ModelConfig::from_text("nonsense=1\n"), ConfigError);
}

TEST_CASE("output length equals r for every family") {
  for (auto f : {Family::wavenet, Family::cnn, Family::rnn})
    for (std::size_t L : {15, 31, 63})
      for (std::size_t r : {1, 10}) {
        const auto m = build_model<double>(small_config(f, L, r));
        std::vector<double> w(L + r - 1, 0.1);
        CHECK(m->forward(w).size() == r);
        std::vector<double> bad(L + r);
        CHECK_THROWS_AS(m->forward(bad), ShapeError);
      }
}

TEST_CASE("zero window with zero biases gives the head bias everywhere") {
  for (auto f : {Family::wavenet, Family::cnn, Family::rnn}) {
    const auto m = build_model<double>(small_config(f, 15, 5));
    for (auto &p : m->parameters())
      if (p.name == "head.bias")
        p.tensor->values()[0] = 0.25;
    std::vector<double> w(19, 0.0);
    const auto out = m->forward(w);
    for (double v : out.values())
      CHECK(v == 0.25);
  }
}

TEST_CASE("wavenet influence region equals the receptive field") {
  for (std::size_t s : {3, 4, 5}) {
    auto c = small_config(Family::wavenet, wavenet_receptive_field(s), 5);
    auto m = build_model<double>(c);
    randomize_parameters(*m, s);
    const std::size_t L = c.receptive_field;
    for (std::size_t k : {0, 4}) {
      const auto reg = measure_influence(*m, k, 17 + s);
      CHECK(reg.count == L);
      CHECK(reg.contiguous());
      // Centred on window index floor(L/2) + k.
      CHECK(reg.first == k);
      CHECK(reg.last == k + L - 1);
    }
  }
}

TEST_CASE("cnn output depends only on its own receptive field") {
  auto c = small_config(Family::cnn, 31, 10);
  auto m = build_model<double>(c);
  randomize_parameters(*m, 4);
  for (std::size_t k : {0, 5, 9}) {
    const auto reg = measure_influence(*m, k, 3);
    CHECK(reg.first >= k);
    CHECK(reg.last <= k + 30);
  }
}

TEST_CASE("rnn output sees the whole window") {
  auto c = small_config(Family::rnn, 15, 4);
  auto m = build_model<double>(c);
  randomize_parameters(*m, 4);
  const auto reg = measure_influence(*m, 0, 3);
  CHECK(reg.count == c.window_length());
}

TEST_CASE("fast and pointwise outputs agree bitwise") {
  for (auto f : {Family::wavenet, Family::cnn}) {
    auto fast = build_model<double>(small_config(f, 31, 10));
    auto point = build_model<double>(small_config(f, 31, 1));
    randomize_parameters(*fast, 7);
    copy_parameters(*fast, *point);
    const auto res = compare_fast_to_pointwise(*fast, *point, 12);
    CHECK(res.compared == 10);
    CHECK(res.bitwise_mismatches == 0);
  }
}

TEST_CASE("parameter counts are a pure function of the config") {
  // Frozen from the layer definitions: input 1x1, per block dilated
  // 2R x R x 3, residual R x R (all but last), skip S x R, post S x S,
  // head 1 x S.
  const std::size_t R = 32, S = 64, s = 6;
  const std::size_t expected = (R + R) + s * (2 * R * R * 3 + 2 * R) +
                               (s - 1) * (R * R + R) + s * (S * R + S) +
                               (S * S + S) + (S + 1);
  CHECK(build_model<float>(wavenet_config(6, 10))->parameter_count() == expected);
  CHECK(expected == 59489);

  ModelConfig cnn;
  cnn.family = Family::cnn;
  cnn.receptive_field = 127;
  cnn.target_field = 10;
  // conv stack shrink 9+7+5+4+4 = 29, dense kernel 127 - 29 = 98.
  const std::size_t cnn_expected = (30 * 1 * 10 + 30) + (30 * 30 * 8 + 30) +
                                   (40 * 30 * 6 + 40) + (50 * 40 * 5 + 50) +
                                   (50 * 50 * 5 + 50) +
                                   (1024 * 50 * 98 + 1024) + (1024 + 1);
  CHECK(build_model<float>(cnn)->parameter_count() == cnn_expected);

  ModelConfig rnn;
  rnn.family = Family::rnn;
  rnn.receptive_field = 127;
  const std::size_t H = 64;
  auto gru = [&](std::size_t in) { return 3 * (H * in + H * H + H); };
  const std::size_t rnn_expected =
    2 * gru(1) + 2 * gru(2 * H) + 2 * gru(2 * H) + (2 * H + 1);
  CHECK(build_model<float>(rnn)->parameter_count() == rnn_expected);
}

TEST_CASE("model gradients match finite differences") {
  for (auto f : {Family::wavenet, Family::cnn, Family::rnn})
    for (auto head : {Head::regression, Head::classification}) {
      auto c = small_config(f, 15, 3);
      c.head = head;
      auto m = build_model<double>(c);
      randomize_parameters(*m, 21, 0.3);
      CounterRng rng(2);
      std::vector<double> w(c.window_length()), gw(3);
      for (auto &v : w)
        v = rng.uniform(-1, 1);
      for (auto &v : gw)
        v = rng.uniform(-1, 1);
      auto objective = [&] {
        const auto y = m->forward(w);
        double s = 0;
        for (std::size_t k = 0; k < 3; ++k)
          s += y[k] * gw[k];
        return s;
      };
      m->zero_grad();
      std::unique_ptr<Trace> trace;
      m->forward(w, trace);
      m->backward(*trace, gw);
      double worst = 0;
      for (auto &p : m->parameters()) {
        // Large dense layers: spot-check the first entries only.
        const std::size_t n = std::min<std::size_t>(p.tensor->size(), 40);
        std::vector<double> analytic(p.tensor->grad().begin(),
                                     p.tensor->grad().begin() + n);
        const auto numeric =
          numeric_gradient(p.tensor->values().subspan(0, n), objective);
        worst = std::max(worst, relative_error(analytic, numeric));
      }
      INFO(to_string(f), " ", to_string(head));
      CHECK(worst < 1e-4);
    }
}

TEST_CASE("float and double models agree closely") {
  auto c = small_config(Family::wavenet, 31, 10);
  auto d = build_model<double>(c);
  auto f = build_model<float>(c);
  copy_parameters(*d, *f);
  std::vector<double> w(40);
  std::vector<float> wf(40);
  CounterRng rng(1);
  for (std::size_t i = 0; i < 40; ++i)
    wf[i] = float(w[i] = rng.uniform(-1, 1));
  const auto yd = d->forward(w);
  const auto yf = f->forward(wf);
  for (std::size_t k = 0; k < 10; ++k)
    CHECK(std::abs(yd[k] - yf[k]) < 1e-4);
}

TEST_CASE("initialisation is seeded and glorot bounded") {
  auto c = wavenet_config(3, 1);
  auto a = build_model<float>(c), b = build_model<float>(c);
  c.seed = 2;
  auto other = build_model<float>(c);
  const auto pa = std::as_const(*a).parameters();
  const auto pb = std::as_const(*b).parameters();
  const auto po = std::as_const(*other).parameters();
  bool differs = false;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    const auto va = pa[k].tensor->values(), vb = pb[k].tensor->values(),
               vo = po[k].tensor->values();
    CHECK(std::equal(va.begin(), va.end(), vb.begin()));
    differs |= !std::equal(va.begin(), va.end(), vo.begin());
    const auto &sh = pa[k].tensor->shape();
    if (sh.size() == 3) {
      const double bound = std::sqrt(6.0 / double(sh[1] * sh[2] + sh[0] * sh[2]));
      for (float v : va)
        CHECK(std::abs(v) <= bound);
    } else {
      for (float v : va)
        CHECK(v == 0.0f);
    }
  }
  CHECK(differs);
}

TEST_CASE("trained model files round trip bit for bit") {
  for (auto f : {Family::wavenet, Family::cnn, Family::rnn}) {
    TrainedModel t;
    t.config = small_config(f, 15, 4);
    t.appliance = "kettle";
    t.on_threshold = 2000;
    t.stats = {{"aggregate", 412.3456789, 601.1}, {"kettle", 20.1, 187.00000001}};
    t.model = build_model<float>(t.config);
    CounterRng rng(3);
    for (auto &p : t.model->parameters())
      for (auto &v : p.tensor->values())
        v = float(rng.normal());
    const auto bytes = encode_model(t);
    const auto back = decode_model(bytes);
    CHECK(back.config == t.config);
    CHECK(back.stats == t.stats);
    CHECK(back.appliance == "kettle");
    CHECK(encode_model(back) == bytes);
    std::vector<float> w(18, 0.3f);
    const auto y0 = t.model->forward(w), y1 = back.model->forward(w);
    CHECK(std::memcmp(y0.data(), y1.data(), sizeof(float) * y0.size()) == 0);
  }
  CHECK_THROWS_AS(decode_model("garbage!"), FormatError);
}
