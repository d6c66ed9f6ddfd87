// SPDX-License-Identifier: Apache-2.0
/**
 * Five-layer convolutional seq2point network applied fully convolutionally.
 *
 * The conv stack (valid, ReLU) runs once over the L + r - 1 window. The dense
 * layer of the seq2point design is evaluated at each of the r target
 * positions over the L - shrink feature columns belonging to that position's
 * own L-sample sub-window, i.e. as a convolution whose kernel spans those
 * columns. Output k therefore depends only on window samples [k, k + L).
 */
#include <nilm/core/conv1d.hpp>
#include <nilm/core/ops.hpp>
#include <nilm/core/rng.hpp>
#include <nilm/model/model.hpp>

namespace nilm {

namespace {

template <typename Real> struct CnnTrace final : Trace {
  Tensor<Real> x;
  std::vector<Tensor<Real>> pre, act; ///< per conv layer
  Tensor<Real> dense, dense_act, y, p;
};

template <typename Real> class ConvNet final : public Model<Real> {
 public:
  explicit ConvNet(const ModelConfig &c) : Model<Real>(c) {
    c.validate();
    std::size_t channels = 1, shrink = 0;
    for (const auto &layer : c.resolved_cnn_filters()) {
      convs_.emplace_back(layer.filters, channels, layer.length);
      channels = layer.filters;
      shrink += layer.length - 1;
    }
    dense_ = Conv1dParams<Real>(c.cnn_dense_units, channels,
                                c.receptive_field - shrink);
    head_ = Conv1dParams<Real>(1, c.cnn_dense_units, 1);
    std::uint64_t stream = 0;
    for (auto &p : parameters()) {
      const auto &shape = p.tensor->shape();
      if (shape.size() == 3)
        glorot_uniform(*p.tensor, shape[1] * shape[2], shape[0] * shape[2],
                       derive_seed(c.seed, stream));
      ++stream;
    }
  }

  std::vector<NamedTensor<Real>> parameters() override {
    std::vector<NamedTensor<Real>> out;
    auto add = [&](const std::string &name, Conv1dParams<Real> &p) {
      out.push_back({name + ".filters", &p.filters});
      out.push_back({name + ".bias", &p.bias});
    };
    for (std::size_t k = 0; k < convs_.size(); ++k)
      add("conv" + std::to_string(k), convs_[k]);
    add("dense", dense_);
    add("head", head_);
    return out;
  }

  std::unique_ptr<Model<Real>> clone() const override {
    return std::make_unique<ConvNet>(*this);
  }

  void backward(Trace &base, std::span<const Real> grad_output) override {
    auto &t = dynamic_cast<CnnTrace<Real> &>(base);
    const std::size_t r = this->config().target_field;
    if (grad_output.size() != r)
      throw ShapeError("cnn backward: expected " + std::to_string(r) +
                       " output gradients");
    Tensor<Real> gout({1, r}, {grad_output.begin(), grad_output.end()});
    if (this->config().head == Head::classification) {
      sigmoid_backward(t.y, t.p, gout);
      gout = t.y.release_grad();
    }
    conv1d_backward(t.dense_act, head_, gout);
    relu_backward(t.dense, t.dense_act.release_grad());
    conv1d_backward(t.act.back(), dense_, t.dense.release_grad());
    for (std::size_t k = convs_.size(); k-- > 0;) {
      relu_backward(t.pre[k], t.act[k].release_grad());
      Tensor<Real> &in = k == 0 ? t.x : t.act[k - 1];
      conv1d_backward(in, convs_[k], t.pre[k].release_grad(), k > 0);
    }
  }

 protected:
  Tensor<Real> run(std::span<const Real> window,
                   std::unique_ptr<Trace> *trace) const override {
    this->check_window(window);
    auto t = std::make_unique<CnnTrace<Real>>();
    t->x = Tensor<Real>({1, window.size()}, {window.begin(), window.end()});
    for (std::size_t k = 0; k < convs_.size(); ++k) {
      t->pre.push_back(conv1d_forward(k == 0 ? t->x : t->act.back(), convs_[k]));
      t->act.push_back(relu(t->pre.back()));
    }
    t->dense = conv1d_forward(t->act.back(), dense_);
    t->dense_act = relu(t->dense);
    t->y = conv1d_forward(t->dense_act, head_);
    Tensor<Real> out;
    if (this->config().head == Head::classification) {
      t->p = sigmoid(t->y);
      out = t->p;
    } else {
      out = t->y;
    }
    out.reshape({this->config().target_field});
    if (trace)
      *trace = std::move(t);
    return out;
  }

 private:
  std::vector<Conv1dParams<Real>> convs_;
  Conv1dParams<Real> dense_, head_;
};

} // namespace

template <typename Real>
std::unique_ptr<Model<Real>> build_cnn(const ModelConfig &config) {
  if (config.family != Family::cnn)
    throw ConfigError("build_cnn: config family is " +
                      to_string(config.family));
  return std::make_unique<ConvNet<Real>>(config);
}

template std::unique_ptr<Model<float>> build_cnn(const ModelConfig &);
template std::unique_ptr<Model<double>> build_cnn(const ModelConfig &);

} // namespace nilm
