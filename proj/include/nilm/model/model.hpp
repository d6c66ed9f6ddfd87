// SPDX-License-Identifier: Apache-2.0
/**
 * @file   model.hpp
 * @brief  Common interface of the fast sequence-to-point networks.
 *
 * Every model maps a window of L + r - 1 aggregate samples to r outputs; the
 * output k is the estimate for window index floor(L/2) + k. Classification
 * heads return probabilities (sigmoid applied), regression heads raw values.
 */
#pragma once

#include <nilm/core/tensor.hpp>
#include <nilm/model/config.hpp>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nilm {

template <typename Real> struct NamedTensor {
  std::string name;
  Tensor<Real> *tensor;
};

template <typename Real> struct ConstNamedTensor {
  std::string name;
  const Tensor<Real> *tensor;
};

/// Activations recorded by a training forward pass.
struct Trace {
  virtual ~Trace() = default;
};

template <typename Real> class Model {
 public:
  explicit Model(ModelConfig config) : config_(std::move(config)) {}
  virtual ~Model() = default;

  const ModelConfig &config() const { return config_; }

  /// Inference forward pass. Thread-safe on a frozen model.
  Tensor<Real> forward(std::span<const Real> window) const {
    return run(window, nullptr);
  }
  /// Training forward pass; `trace` receives what backward() needs.
  Tensor<Real> forward(std::span<const Real> window,
                       std::unique_ptr<Trace> &trace) const {
    return run(window, &trace);
  }
  /// Accumulates d(loss)/d(parameters) given d(loss)/d(outputs). For the
  /// classification head the gradient is taken w.r.t. the probabilities.
  virtual void backward(Trace &trace, std::span<const Real> grad_output) = 0;

  /// Stable, uniquely named parameter list.
  virtual std::vector<NamedTensor<Real>> parameters() = 0;
  std::vector<ConstNamedTensor<Real>> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  virtual std::unique_ptr<Model> clone() const = 0;

 protected:
  virtual Tensor<Real> run(std::span<const Real> window,
                           std::unique_ptr<Trace> *trace) const = 0;
  void check_window(std::span<const Real> window) const;

 private:
  ModelConfig config_;
};

template <typename Real>
std::unique_ptr<Model<Real>> build_wavenet(const ModelConfig &config);
template <typename Real>
std::unique_ptr<Model<Real>> build_cnn(const ModelConfig &config);
template <typename Real>
std::unique_ptr<Model<Real>> build_rnn(const ModelConfig &config);
/// Dispatches on config.family.
template <typename Real>
std::unique_ptr<Model<Real>> build_model(const ModelConfig &config);

/// Copies parameter values between models whose parameters match by name and
/// shape (e.g. the same architecture at different target fields), converting
/// precision when the scalar types differ.
template <typename From, typename To>
void copy_parameters(const Model<From> &from, Model<To> &to);

/// Glorot-uniform weights and zero biases drawn from `seed`. `fan_in` and
/// `fan_out` include the filter length for convolutions.
template <typename Real>
void glorot_uniform(Tensor<Real> &t, std::size_t fan_in, std::size_t fan_out,
                    std::uint64_t seed);

} // namespace nilm
