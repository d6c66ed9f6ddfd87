// SPDX-License-Identifier: Apache-2.0
/**
 * Stacked bidirectional GRU. Each layer runs a forward and a backward GRU
 * over the whole window and concatenates their states per time step; the
 * head is one dense unit shared across the r target positions
 * floor(L/2) ... floor(L/2) + r - 1.
 */
#include <nilm/core/gru.hpp>
#include <nilm/core/ops.hpp>
#include <nilm/core/rng.hpp>
#include <nilm/model/model.hpp>

#include <algorithm>

namespace nilm {

namespace {

template <typename Real> struct RnnTrace final : Trace {
  struct Layer {
    Tensor<Real> input; ///< [N, features]
    Tensor<Real> h0_fwd, h0_bwd;
    GruCache<Real> cache_fwd, cache_bwd;
    Tensor<Real> out_fwd, out_bwd;
  };
  std::vector<Layer> layers;
  Tensor<Real> top;    ///< [N, 2H] output of the last layer
  Tensor<Real> center; ///< [r, 2H]
  Tensor<Real> y, p;   ///< [r, 1]
};

template <typename Real>
Tensor<Real> concat_columns(const Tensor<Real> &a, const Tensor<Real> &b) {
  const std::size_t n = a.extent(0), ca = a.extent(1), cb = b.extent(1);
  Tensor<Real> out({n, ca + cb});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data() + i * ca, ca, out.data() + i * (ca + cb));
    std::copy_n(b.data() + i * cb, cb, out.data() + i * (ca + cb) + ca);
  }
  return out;
}

template <typename Real> class RecurrentNet final : public Model<Real> {
 public:
  struct LayerParams {
    GruCellParams<Real> fwd, bwd;
  };

  explicit RecurrentNet(const ModelConfig &c) : Model<Real>(c) {
    c.validate();
    const std::size_t H = c.hidden_size;
    std::size_t in = 1;
    for (std::size_t l = 0; l < c.rnn_layers; ++l) {
      layers_.push_back({GruCellParams<Real>(H, in), GruCellParams<Real>(H, in)});
      in = 2 * H;
    }
    head_ = DenseParams<Real>(1, 2 * H);
    std::uint64_t stream = 0;
    for (auto &p : parameters()) {
      const auto &shape = p.tensor->shape();
      if (shape.size() == 2)
        glorot_uniform(*p.tensor, shape[1], shape[0],
                       derive_seed(c.seed, stream));
      ++stream;
    }
  }

  std::vector<NamedTensor<Real>> parameters() override {
    std::vector<NamedTensor<Real>> out;
    auto add_gru = [&](const std::string &name, GruCellParams<Real> &p) {
      out.push_back({name + ".W_r", &p.W_r});
      out.push_back({name + ".W_z", &p.W_z});
      out.push_back({name + ".W", &p.W});
      out.push_back({name + ".U_r", &p.U_r});
      out.push_back({name + ".U_z", &p.U_z});
      out.push_back({name + ".U", &p.U});
      out.push_back({name + ".b_r", &p.b_r});
      out.push_back({name + ".b_z", &p.b_z});
      out.push_back({name + ".b", &p.b});
    };
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      add_gru("gru" + std::to_string(l) + ".fwd", layers_[l].fwd);
      add_gru("gru" + std::to_string(l) + ".bwd", layers_[l].bwd);
    }
    out.push_back({"head.weight", &head_.weight});
    out.push_back({"head.bias", &head_.bias});
    return out;
  }

  std::unique_ptr<Model<Real>> clone() const override {
    return std::make_unique<RecurrentNet>(*this);
  }

  void backward(Trace &base, std::span<const Real> grad_output) override {
    auto &t = dynamic_cast<RnnTrace<Real> &>(base);
    const auto &c = this->config();
    const std::size_t r = c.target_field, H = c.hidden_size;
    if (grad_output.size() != r)
      throw ShapeError("rnn backward: expected " + std::to_string(r) +
                       " output gradients");
    Tensor<Real> gout({r, 1}, {grad_output.begin(), grad_output.end()});
    if (c.head == Head::classification) {
      sigmoid_backward(t.y, t.p, gout);
      gout = t.y.release_grad();
    }
    dense_backward(t.center, head_, gout);
    Tensor<Real> gtop = t.center.release_grad();

    // Gradient w.r.t. the [N, 2H] output of the current layer.
    const std::size_t N = t.top.extent(0);
    Tensor<Real> gcat({N, 2 * H});
    std::copy_n(gtop.data(), gtop.size(),
                gcat.data() + c.target_offset() * 2 * H);

    for (std::size_t l = layers_.size(); l-- > 0;) {
      auto &lt = t.layers[l];
      Tensor<Real> gf({N, H}), gb({N, H});
      for (std::size_t i = 0; i < N; ++i) {
        std::copy_n(gcat.data() + i * 2 * H, H, gf.data() + i * H);
        std::copy_n(gcat.data() + i * 2 * H + H, H, gb.data() + i * H);
      }
      const bool propagate = l > 0;
      gru_backward(lt.input, lt.h0_fwd, layers_[l].fwd, Direction::forward,
                   lt.cache_fwd, gf, propagate);
      gru_backward(lt.input, lt.h0_bwd, layers_[l].bwd, Direction::backward,
                   lt.cache_bwd, gb, propagate);
      if (propagate)
        gcat = lt.input.release_grad();
      lt = {};
    }
  }

 protected:
  Tensor<Real> run(std::span<const Real> window,
                   std::unique_ptr<Trace> *trace) const override {
    this->check_window(window);
    const auto &c = this->config();
    const std::size_t H = c.hidden_size, r = c.target_field;
    auto t = std::make_unique<RnnTrace<Real>>();
    Tensor<Real> x({window.size(), 1}, {window.begin(), window.end()});
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      typename RnnTrace<Real>::Layer lt;
      lt.input = l == 0 ? std::move(x) : std::move(t->top);
      lt.h0_fwd = Tensor<Real>({H});
      lt.h0_bwd = Tensor<Real>({H});
      lt.out_fwd = gru_forward(lt.input, lt.h0_fwd, layers_[l].fwd,
                               Direction::forward, &lt.cache_fwd);
      lt.out_bwd = gru_forward(lt.input, lt.h0_bwd, layers_[l].bwd,
                               Direction::backward, &lt.cache_bwd);
      t->top = concat_columns(lt.out_fwd, lt.out_bwd);
      t->layers.push_back(std::move(lt));
    }
    t->center = Tensor<Real>({r, 2 * H});
    std::copy_n(t->top.data() + c.target_offset() * 2 * H, r * 2 * H,
                t->center.data());
    t->y = dense_forward(t->center, head_);
    Tensor<Real> out;
    if (c.head == Head::classification) {
      t->p = sigmoid(t->y);
      out = t->p;
    } else {
      out = t->y;
    }
    out.reshape({r});
    if (trace)
      *trace = std::move(t);
    return out;
  }

 private:
  std::vector<LayerParams> layers_;
  DenseParams<Real> head_;
};

} // namespace

template <typename Real>
std::unique_ptr<Model<Real>> build_rnn(const ModelConfig &config) {
  if (config.family != Family::rnn)
    throw ConfigError("build_rnn: config family is " +
                      to_string(config.family));
  return std::make_unique<RecurrentNet<Real>>(config);
}

template std::unique_ptr<Model<float>> build_rnn(const ModelConfig &);
template std::unique_ptr<Model<double>> build_rnn(const ModelConfig &);

} // namespace nilm
