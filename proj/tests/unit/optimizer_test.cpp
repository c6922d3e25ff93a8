// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "memlab/errors.hpp"
#include "memlab/optimizer.hpp"

namespace memlab {
namespace {

TEST(LrSchedule, BoundaryValues) {
  const LrSchedule s{1e-3, 100, 1000};
  EXPECT_EQ(s.lr_at(0), 0.0);
  EXPECT_EQ(s.lr_at(100), 1e-3);
  EXPECT_EQ(s.lr_at(1000), 0.0);
  EXPECT_EQ(s.lr_at(5000), 0.0);
  EXPECT_DOUBLE_EQ(s.lr_at(50), 5e-4);
  EXPECT_DOUBLE_EQ(s.lr_at(550), 5e-4);
}

TEST(LrSchedule, WarmupFraction) {
  const auto s = LrSchedule::with_warmup_fraction(2e-4, 1'000'000, 0.01);
  EXPECT_EQ(s.warmup_tokens, 10'000u);
  EXPECT_EQ(s.total_tokens, 1'000'000u);
  EXPECT_EQ(s.lr_at(10'000), 2e-4);
}

TEST(LrSchedule, RejectsDegenerateWindows) {
  EXPECT_THROW((LrSchedule{1e-3, 0, 100}.validate()), ConfigError);
  EXPECT_THROW((LrSchedule{1e-3, 100, 100}.validate()), ConfigError);
  EXPECT_THROW((LrSchedule{-1.0, 10, 100}.validate()), ConfigError);
}

TEST(Adam, ZeroGradientIsAFixedPoint) {
  Tensor<double> p({4}, {1.0, -2.0, 0.5, 3.0}, true);
  std::vector<Tensor<double>> params = {p};
  auto state = AdamState<double>::for_parameters(params);
  const std::vector<double> before(p.values().begin(), p.values().end());
  for (int i = 0; i < 5; ++i) adam_step<double>(params, state, 1e-2);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p.values()[i], before[i]);
  EXPECT_EQ(state.step, 5u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps'), i.e. lr * sign(g).
  Tensor<double> p({3}, {0.0, 0.0, 0.0}, true);
  p.grad()[0] = 2.0;
  p.grad()[1] = -0.5;
  p.grad()[2] = 0.0;
  std::vector<Tensor<double>> params = {p};
  auto state = AdamState<double>::for_parameters(params);
  adam_step<double>(params, state, 0.1);
  EXPECT_NEAR(p.values()[0], -0.1, 1e-8);
  EXPECT_NEAR(p.values()[1], 0.1, 1e-8);
  EXPECT_EQ(p.values()[2], 0.0);
}

TEST(Adam, MatchesReferenceRecurrence) {
  Tensor<double> p({1}, {1.0}, true);
  std::vector<Tensor<double>> params = {p};
  auto state = AdamState<double>::for_parameters(params);
  double m = 0, v = 0, x = 1.0;
  const double lr = 0.05, b1 = state.beta1, b2 = state.beta2, eps = state.eps;
  for (int t = 1; t <= 10; ++t) {
    const double g = 2.0 * x;  // d/dx x^2
    p.grad()[0] = g;
    adam_step<double>(params, state, lr);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    x -= lr * mh / (std::sqrt(vh) + eps);
    EXPECT_NEAR(p.values()[0], x, 1e-12) << "step " << t;
  }
}

TEST(Adam, NonFiniteGradientLeavesStateUntouched) {
  Tensor<double> p({2}, {1.0, 2.0}, true);
  p.grad()[1] = std::nan("");
  std::vector<Tensor<double>> params = {p};
  auto state = AdamState<double>::for_parameters(params);
  const std::vector<std::string> names = {"w"};
  try {
    adam_step<double>(params, state, 0.1, names);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("w"), std::string::npos);
  }
  EXPECT_EQ(p.values()[0], 1.0);
  EXPECT_EQ(state.step, 0u);
}

}  // namespace
}  // namespace memlab
