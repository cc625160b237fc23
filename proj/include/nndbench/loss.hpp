#pragma once

#include "nndbench/errors.hpp"
#include "nndbench/tensor.hpp"

namespace nndbench {

// Mean over the batch of (1/K) * sum_i (x_i - x_hat_i)^2, shapes [batch, K].
template <typename T>
double mse_loss(const Tensor<T>& target, const Tensor<T>& prediction) {
  if (!target.same_shape(prediction) || target.rank() != 2) {
    throw ArgumentError("mse_loss: expected matching [batch, K] tensors, got " +
                        target.shape_string() + " and " + prediction.shape_string());
  }
  double acc = 0.0;
  for (std::int64_t i = 0; i < target.size(); ++i) {
    const double e = static_cast<double>(target[i]) - static_cast<double>(prediction[i]);
    acc += e * e;
  }
  return acc / static_cast<double>(target.size());
}

// d(mse_loss)/d(prediction).
template <typename T>
Tensor<T> mse_loss_grad(const Tensor<T>& target, const Tensor<T>& prediction) {
  if (!target.same_shape(prediction) || target.rank() != 2) {
    throw ArgumentError("mse_loss_grad: expected matching [batch, K] tensors");
  }
  Tensor<T> grad(prediction.shape());
  const double scale = 2.0 / static_cast<double>(target.size());
  for (std::int64_t i = 0; i < target.size(); ++i) {
    grad[i] = static_cast<T>(scale * (static_cast<double>(prediction[i]) -
                                      static_cast<double>(target[i])));
  }
  return grad;
}

}  // namespace nndbench
