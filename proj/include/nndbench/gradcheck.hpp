#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nndbench/loss.hpp"
#include "nndbench/network.hpp"

namespace nndbench {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::int64_t worst_index = -1;
};

// Compares backprop gradients against central finite differences of the MSE
// loss, parameter by parameter. The numeric side only ever calls forward(),
// so it stays independent of the backward implementation it is checking.
// Dropout is inactive (inference mode) to keep the loss deterministic.
inline GradCheckResult gradient_check(Network<double>& net, const Tensor<double>& input,
                                      const Tensor<double>& target, double h = 1e-5) {
  if (!(h >= 1e-7 && h <= 1e-3)) {
    throw ArgumentError("gradient_check: h must lie in [1e-7, 1e-3]");
  }

  net.zero_grads();
  const Tensor<double> out = net.forward(input, Mode::kInfer);
  net.backward(mse_loss_grad(target, out));

  std::vector<std::vector<double>> analytic;
  for (Param<double>* p : net.params()) {
    analytic.emplace_back(p->grad.data(), p->grad.data() + p->grad.size());
  }

  auto loss_now = [&]() { return mse_loss(target, net.forward(input, Mode::kInfer)); };

  GradCheckResult result;
  std::size_t pi = 0;
  for (Param<double>* p : net.params()) {
    for (std::int64_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double lp = loss_now();
      p->value[i] = saved - h;
      const double lm = loss_now();
      p->value[i] = saved;

      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic[pi][static_cast<std::size_t>(i)];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-12});
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p->name;
        result.worst_index = i;
      }
    }
    ++pi;
  }
  return result;
}

}  // namespace nndbench
