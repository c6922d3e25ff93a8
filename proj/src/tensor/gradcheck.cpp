// SPDX-License-Identifier: Apache-2.0

#include "memlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace memlab {

GradCheckResult finite_difference_check(const ScalarObjective& objective, Tensor<double>& x,
                                        const GradCheckOptions& options) {
  const bool had_grad = x.requires_grad();
  x.set_requires_grad(true);

  GradTape<double> tape;
  auto loss = objective(&tape);
  tape.backward(loss);
  std::vector<double> analytic(x.grad().begin(), x.grad().end());

  std::vector<std::size_t> coords(x.numel());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (options.max_coordinates != 0 && options.max_coordinates < coords.size()) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coordinates);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckResult result;
  auto values = x.values();
  for (auto i : coords) {
    const double saved = values[i];
    auto at = [&](double offset) {
      values[i] = saved + offset;
      return objective(nullptr).item();
    };
    const double h = options.step;
    // Five-point stencil: truncation error O(h^4).
    const double numeric = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
    values[i] = saved;
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > result.max_relative_error || result.coordinates_checked == 0) {
      result.max_relative_error = std::max(result.max_relative_error, rel);
      if (rel >= result.max_relative_error) {
        result.worst_coordinate = i;
        result.worst_analytic = analytic[i];
        result.worst_numeric = numeric;
      }
    }
    ++result.coordinates_checked;
  }
  x.set_requires_grad(had_grad);
  return result;
}

GradCheckResult finite_difference_check(
    const std::function<Tensor<double>(const Tensor<double>&, GradTape<double>*)>& f, Tensor<double>& x,
    const GradCheckOptions& options) {
  return finite_difference_check([&](GradTape<double>* tape) { return f(x, tape); }, x, options);
}

}  // namespace memlab
