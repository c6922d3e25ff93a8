// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <utility>

#include "memlab/errors.hpp"
#include "memlab/optimizer.hpp"

namespace memlab {

template <typename T>
AdamState<T> AdamState<T>::for_parameters(std::span<const Tensor<T>> params) {
  AdamState s;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.numel(), T(0));
    s.second_moment.emplace_back(p.numel(), T(0));
  }
  return s;
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state, double lr, std::span<const std::string> names) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw UsageError("adam state does not match parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].requires_grad()) throw UsageError("adam_step: parameter without gradient");
    if (state.first_moment[i].size() != params[i].numel()) throw UsageError("adam moment shape mismatch");
    const std::string what = "gradient of " + (i < names.size() ? names[i] : "parameter " + std::to_string(i));
    check_finite<T>(std::as_const(params[i]).grad(), what);
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(state.beta1);
  const T b2 = static_cast<T>(state.beta2);
  const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(state.beta1, t)));
  const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(state.beta2, t)));
  const T step_lr = static_cast<T>(lr);
  const T eps = static_cast<T>(state.eps);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values();
    auto g = std::as_const(params[i]).grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T mhat = m[j] * c1;
      const T vhat = v[j] * c2;
      p[j] -= step_lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(std::span<Tensor<float>>, AdamState<float>&, double, std::span<const std::string>);
template void adam_step<double>(std::span<Tensor<double>>, AdamState<double>&, double, std::span<const std::string>);

}  // namespace memlab
