// SPDX-License-Identifier: Apache-2.0
#include <nilm/model/model.hpp>

#include <nilm/core/rng.hpp>

#include <cmath>
#include <stdexcept>

namespace nilm {

template <typename Real>
std::vector<ConstNamedTensor<Real>> Model<Real>::parameters() const {
  std::vector<ConstNamedTensor<Real>> out;
  for (auto &p : const_cast<Model *>(this)->parameters())
    out.push_back({p.name, p.tensor});
  return out;
}

template <typename Real> std::size_t Model<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto &p : parameters())
    n += p.tensor->size();
  return n;
}

template <typename Real> void Model<Real>::zero_grad() {
  for (auto &p : parameters())
    p.tensor->zero_grad();
}

template <typename Real>
void Model<Real>::check_window(std::span<const Real> window) const {
  if (window.size() != config_.window_length())
    throw ShapeError("model expects a window of L + r - 1 = " +
                     std::to_string(config_.window_length()) +
                     " samples, got " + std::to_string(window.size()));
}

template <typename Real>
std::unique_ptr<Model<Real>> build_model(const ModelConfig &config) {
  switch (config.family) {
  case Family::wavenet:
    return build_wavenet<Real>(config);
  case Family::cnn:
    return build_cnn<Real>(config);
  case Family::rnn:
    return build_rnn<Real>(config);
  }
  throw ConfigError("unknown model family");
}

template <typename From, typename To>
void copy_parameters(const Model<From> &from, Model<To> &to) {
  const auto src = from.parameters();
  auto dst = to.parameters();
  if (src.size() != dst.size())
    throw ShapeError("copy_parameters: models have " +
                     std::to_string(src.size()) + " and " +
                     std::to_string(dst.size()) + " parameters");
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (src[k].name != dst[k].name ||
        src[k].tensor->shape() != dst[k].tensor->shape())
      throw ShapeError("copy_parameters: parameter '" + src[k].name +
                       "' does not match '" + dst[k].name + "'");
    auto out = dst[k].tensor->values();
    auto in = src[k].tensor->values();
    for (std::size_t i = 0; i < in.size(); ++i)
      out[i] = To(in[i]);
  }
}

template <typename Real>
void glorot_uniform(Tensor<Real> &t, std::size_t fan_in, std::size_t fan_out,
                    std::uint64_t seed) {
  const double a = std::sqrt(6.0 / double(fan_in + fan_out));
  CounterRng rng(seed);
  for (auto &v : t.values())
    v = Real(rng.uniform(-a, a));
}

template class Model<float>;
template class Model<double>;
template std::unique_ptr<Model<float>> build_model(const ModelConfig &);
template std::unique_ptr<Model<double>> build_model(const ModelConfig &);
template void copy_parameters(const Model<float> &, Model<float> &);
template void copy_parameters(const Model<float> &, Model<double> &);
template void copy_parameters(const Model<double> &, Model<float> &);
template void copy_parameters(const Model<double> &, Model<double> &);
template void glorot_uniform(Tensor<float> &, std::size_t, std::size_t,
                             std::uint64_t);
template void glorot_uniform(Tensor<double> &, std::size_t, std::size_t,
                             std::uint64_t);

} // namespace nilm
