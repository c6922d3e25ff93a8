// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

#include "memlab/tensor.hpp"

namespace memlab {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::size_t worst_coordinate = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckOptions {
  double step = 1e-3;
  /// 0 checks every coordinate.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
};

/// Scalar objective that reads `x` (captured by the caller) and records onto
/// the tape when one is passed.
using ScalarObjective = std::function<Tensor<double>(GradTape<double>*)>;

/// Compares the tape gradient of `objective` w.r.t. `x` with central
/// differences, perturbing `x` in place and restoring it afterwards.
/// Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult finite_difference_check(const ScalarObjective& objective, Tensor<double>& x,
                                        const GradCheckOptions& options = {});

/// Convenience form for objectives that are a pure function of x.
GradCheckResult finite_difference_check(
    const std::function<Tensor<double>(const Tensor<double>&, GradTape<double>*)>& f, Tensor<double>& x,
    const GradCheckOptions& options = {});

}  // namespace memlab
