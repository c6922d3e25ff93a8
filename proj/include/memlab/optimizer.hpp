// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "memlab/tensor.hpp"

namespace memlab {

/// Piecewise-linear warmup/decay schedule measured in tokens processed:
/// 0 -> max_lr over [0, W], max_lr -> 0 over [W, T], 0 beyond T.
struct LrSchedule {
  double max_lr = 0.0;
  std::uint64_t warmup_tokens = 0;
  std::uint64_t total_tokens = 0;

  /// Warmup is the same fraction of the run as 375M of 100B tokens.
  static constexpr double kDefaultWarmupFraction = 375.0 / 100000.0;

  /// Throws ConfigError unless 0 < W < T and max_lr >= 0.
  static LrSchedule with_warmup_fraction(double max_lr, std::uint64_t total_tokens,
                                         double warmup_fraction = kDefaultWarmupFraction);
  void validate() const;
  double lr_at(std::uint64_t tokens_processed) const;
};

/// Adam with bias correction and no weight decay.
template <typename T>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;

  /// Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<const Tensor<T>> params);
};

/// One bias-corrected Adam update from the gradients stored on `params`.
/// Throws NumericError naming the parameter when a gradient is not finite;
/// parameters and state are left untouched in that case.
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state, double lr,
               std::span<const std::string> names = {});

extern template struct AdamState<float>;
extern template struct AdamState<double>;

}  // namespace memlab
