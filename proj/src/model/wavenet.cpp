// SPDX-License-Identifier: Apache-2.0
/**
 * Non-causal WaveNet for fast sequence-to-point.
 *
 *   window [1, L+r-1] -> 1x1 input projection -> s residual blocks
 *   block b (dilation 2^b): z = tanh(f) * sigmoid(g), [f; g] = dilated conv
 *                           residual = 1x1(z) + centre crop of block input
 *                           skip     = 1x1(centre r samples of z)
 *   sum of skips -> relu -> 1x1 -> relu -> 1x1 head (-> sigmoid)
 *
 * Only the dilated convolutions shrink the time axis, so every output sees
 * exactly (2^s - 1) * 2 + 1 input samples. Skips are cropped to the r
 * target positions before the 1x1 projection since nothing else reads them.
 */
#include <nilm/core/conv1d.hpp>
#include <nilm/core/ops.hpp>
#include <nilm/core/rng.hpp>
#include <nilm/model/model.hpp>

namespace nilm {

namespace {

template <typename Real> struct WaveNetTrace final : Trace {
  struct Block {
    Tensor<Real> fg, f, g, tf, sg, z, zc, skip, res, skip_in;
    std::size_t crop_offset = 0;
  };
  Tensor<Real> x;
  std::vector<Tensor<Real>> h; ///< h[b] is the input of block b
  std::vector<Block> blocks;
  Tensor<Real> skip_sum, a1, o1, a2, y, p;
};

template <typename Real> class WaveNet final : public Model<Real> {
 public:
  explicit WaveNet(const ModelConfig &c) : Model<Real>(c) {
    c.validate();
    const std::size_t R = c.residual_channels, S = c.skip_channels;
    input_proj_ = Conv1dParams<Real>(R, 1, 1);
    for (std::size_t b = 0; b < c.layers; ++b) {
      dilated_.emplace_back(2 * R, R, c.filter_length, std::size_t(1) << b);
      skip_.emplace_back(S, R, 1);
      if (b + 1 < c.layers)
        residual_.emplace_back(R, R, 1);
    }
    post_ = Conv1dParams<Real>(S, S, 1);
    head_ = Conv1dParams<Real>(1, S, 1);

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
    add("input", input_proj_);
    for (std::size_t b = 0; b < dilated_.size(); ++b) {
      const std::string prefix = "block" + std::to_string(b);
      add(prefix + ".dilated", dilated_[b]);
      if (b < residual_.size())
        add(prefix + ".residual", residual_[b]);
      add(prefix + ".skip", skip_[b]);
    }
    add("post", post_);
    add("head", head_);
    return out;
  }

  std::unique_ptr<Model<Real>> clone() const override {
    return std::make_unique<WaveNet>(*this);
  }

  void backward(Trace &base, std::span<const Real> grad_output) override {
    auto &t = dynamic_cast<WaveNetTrace<Real> &>(base);
    const std::size_t r = this->config().target_field;
    if (grad_output.size() != r)
      throw ShapeError("wavenet backward: expected " + std::to_string(r) +
                       " output gradients");
    Tensor<Real> gout({1, r}, {grad_output.begin(), grad_output.end()});
    if (this->config().head == Head::classification) {
      sigmoid_backward(t.y, t.p, gout);
      gout = t.y.release_grad();
    }
    conv1d_backward(t.a2, head_, gout);
    relu_backward(t.o1, t.a2.release_grad());
    conv1d_backward(t.a1, post_, t.o1.release_grad());
    relu_backward(t.skip_sum, t.a1.release_grad());
    const Tensor<Real> gskip = t.skip_sum.release_grad();

    const std::size_t R = this->config().residual_channels;
    for (std::size_t b = dilated_.size(); b-- > 0;) {
      auto &blk = t.blocks[b];
      Tensor<Real> &hin = t.h[b];
      conv1d_backward(blk.zc, skip_[b], gskip);
      crop_backward(blk.z, 0, blk.crop_offset, blk.zc.release_grad());
      if (b < residual_.size()) {
        const Tensor<Real> gnext = t.h[b + 1].release_grad();
        conv1d_backward(blk.z, residual_[b], gnext);
        crop_backward(hin, 0, dilated_[b].dilation, gnext);
      }
      mul_backward(blk.tf, blk.sg, blk.z.release_grad());
      tanh_backward(blk.f, blk.tf, blk.tf.release_grad());
      sigmoid_backward(blk.g, blk.sg, blk.sg.release_grad());
      crop_backward(blk.fg, 0, 0, blk.f.release_grad());
      crop_backward(blk.fg, R, 0, blk.g.release_grad());
      conv1d_backward(hin, dilated_[b], blk.fg.release_grad());
      blk = {};
    }
    conv1d_backward(t.x, input_proj_, t.h[0].release_grad(), false);
  }

 protected:
  Tensor<Real> run(std::span<const Real> window,
                   std::unique_ptr<Trace> *trace) const override {
    this->check_window(window);
    const auto &c = this->config();
    const std::size_t R = c.residual_channels, r = c.target_field;
    auto t = std::make_unique<WaveNetTrace<Real>>();
    t->x = Tensor<Real>({1, window.size()}, {window.begin(), window.end()});
    t->h.push_back(conv1d_forward(t->x, input_proj_));
    t->blocks.resize(dilated_.size());
    for (std::size_t b = 0; b < dilated_.size(); ++b) {
      auto &blk = t->blocks[b];
      const Tensor<Real> &hin = t->h[b];
      blk.fg = conv1d_forward(hin, dilated_[b]);
      const std::size_t len = blk.fg.extent(1);
      blk.f = crop(blk.fg, 0, R, 0, len);
      blk.g = crop(blk.fg, R, R, 0, len);
      blk.tf = tanh(blk.f);
      blk.sg = sigmoid(blk.g);
      blk.z = mul(blk.tf, blk.sg);
      blk.crop_offset = (len - r) / 2;
      blk.zc = crop(blk.z, 0, R, blk.crop_offset, r);
      blk.skip = conv1d_forward(blk.zc, skip_[b]);
      if (b == 0)
        t->skip_sum = blk.skip;
      else
        t->skip_sum = add(t->skip_sum, blk.skip);
      if (b < residual_.size()) {
        blk.res = conv1d_forward(blk.z, residual_[b]);
        blk.skip_in = crop(hin, 0, R, dilated_[b].dilation, len);
        t->h.push_back(add(blk.res, blk.skip_in));
      }
    }
    t->a1 = relu(t->skip_sum);
    t->o1 = conv1d_forward(t->a1, post_);
    t->a2 = relu(t->o1);
    t->y = conv1d_forward(t->a2, head_);
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
  Conv1dParams<Real> input_proj_;
  std::vector<Conv1dParams<Real>> dilated_, residual_, skip_;
  Conv1dParams<Real> post_, head_;
};

} // namespace

template <typename Real>
std::unique_ptr<Model<Real>> build_wavenet(const ModelConfig &config) {
  if (config.family != Family::wavenet)
    throw ConfigError("build_wavenet: config family is " +
                      to_string(config.family));
  return std::make_unique<WaveNet<Real>>(config);
}

template std::unique_ptr<Model<float>> build_wavenet(const ModelConfig &);
template std::unique_ptr<Model<double>> build_wavenet(const ModelConfig &);

} // namespace nilm
