// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/loss.hpp>
#include <nilm/core/ops.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nilm {

namespace {
void require_equal_length(std::size_t a, std::size_t b, const char *what) {
  if (a != b)
    throw ShapeError(std::string(what) + ": prediction has " +
                     std::to_string(a) + " values, target has " +
                     std::to_string(b));
  if (a == 0)
    throw ShapeError(std::string(what) + ": empty target field");
}
} // namespace

template <typename Real>
LossResult<Real> mae_loss(std::span<const Real> pred,
                          std::span<const Real> target) {
  require_equal_length(pred.size(), target.size(), "mae_loss");
  const Real inv = Real(1) / Real(pred.size());
  LossResult<Real> out;
  out.grad.resize(pred.size());
  Real sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Real d = pred[i] - target[i];
    sum += std::abs(d);
    out.grad[i] = d > 0 ? inv : (d < 0 ? -inv : Real(0));
  }
  out.value = sum * inv;
  return out;
}

template <typename Real>
LossResult<Real> bce_loss(std::span<const Real> prob,
                          std::span<const Real> target) {
  require_equal_length(prob.size(), target.size(), "bce_loss");
  const Real lo = Real(kSigmoidClamp);
  const Real inv = Real(1) / Real(prob.size());
  LossResult<Real> out;
  out.grad.resize(prob.size());
  Real sum = 0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const Real z = target[i];
    if (z != Real(0) && z != Real(1))
      throw std::invalid_argument("bce_loss: target " + std::to_string(z) +
                                  " at index " + std::to_string(i) +
                                  " is not binary");
    const Real p = std::clamp(prob[i], lo, Real(1) - lo);
    if (z == Real(1)) {
      sum -= std::log(p);
      out.grad[i] = -inv / p;
    } else {
      sum -= std::log(Real(1) - p);
      out.grad[i] = inv / (Real(1) - p);
    }
  }
  out.value = sum * inv;
  return out;
}

template LossResult<float> mae_loss(std::span<const float>,
                                    std::span<const float>);
template LossResult<double> mae_loss(std::span<const double>,
                                     std::span<const double>);
template LossResult<float> bce_loss(std::span<const float>,
                                    std::span<const float>);
template LossResult<double> bce_loss(std::span<const double>,
                                     std::span<const double>);

} // namespace nilm
