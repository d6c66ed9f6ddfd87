// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/adam.hpp>

#include <cmath>

namespace nilm {

template <typename Real>
void adam_step(std::span<Tensor<Real> *const> params, AdamState<Real> &state) {
  if (state.m1.empty()) {
    for (const auto *p : params) {
      state.m1.emplace_back(p->size(), Real(0));
      state.m2.emplace_back(p->size(), Real(0));
    }
  }
  if (state.m1.size() != params.size())
    throw ShapeError("adam_step: state tracks " +
                     std::to_string(state.m1.size()) + " tensors, got " +
                     std::to_string(params.size()));
  const auto &o = state.options;
  ++state.step;
  const double t = double(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  const Real b1 = Real(o.beta1), b2 = Real(o.beta2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<Real> &p = *params[k];
    auto &m1 = state.m1[k];
    auto &m2 = state.m2[k];
    if (m1.size() != p.size())
      throw ShapeError("adam_step: moment buffer size mismatch for tensor " +
                       std::to_string(k));
    auto g = p.grad();
    auto v = p.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m1[i] = b1 * m1[i] + (Real(1) - b1) * g[i];
      m2[i] = b2 * m2[i] + (Real(1) - b2) * g[i] * g[i];
      const double mhat = double(m1[i]) / c1;
      const double vhat = double(m2[i]) / c2;
      v[i] = Real(double(v[i]) - o.lr * mhat / (std::sqrt(vhat) + o.epsilon));
    }
  }
}

template void adam_step(std::span<Tensor<float> *const>, AdamState<float> &);
template void adam_step(std::span<Tensor<double> *const>, AdamState<double> &);

} // namespace nilm
