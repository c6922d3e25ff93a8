// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "memlab/errors.hpp"
#include "memlab/gradcheck.hpp"
#include "memlab/ops.hpp"

namespace memlab {
namespace {

Tensor<double> random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor<double>(std::move(shape), std::move(v));
}

// Weighted sum so every output coordinate contributes a distinct gradient.
Tensor<double> reduce(const Tensor<double>& y, GradTape<double>* tape) {
  const auto w = random_tensor(y.shape(), 99);
  return ops::sum(ops::mul(y, w, tape), tape);
}

constexpr double kTol = 1e-6;

TEST(Tensor, CopiesShareStorageAndCloneDoesNot) {
  Tensor<double> a({2, 2}, {1, 2, 3, 4});
  Tensor<double> b = a;
  Tensor<double> c = a.clone();
  b.values()[0] = 9;
  EXPECT_EQ(a.values()[0], 9);
  EXPECT_EQ(c.values()[0], 1);
  EXPECT_TRUE(a.shares_storage(b));
  EXPECT_FALSE(a.shares_storage(c));
}

TEST(Tensor, ItemRequiresScalar) {
  Tensor<double> a({2}, {1, 2});
  EXPECT_THROW(a.item(), UsageError);
  EXPECT_EQ(Tensor<double>::scalar(3.5).item(), 3.5);
}

TEST(Tensor, BackwardTwiceThrows) {
  Tensor<double> x({3}, {1, 2, 3}, true);
  GradTape<double> tape;
  auto loss = ops::sum(x, &tape);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), UsageError);
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Tensor, CheckFiniteRejectsNan) {
  std::vector<double> v = {1.0, std::nan("")};
  EXPECT_THROW(check_finite<double>(v, "v"), NumericError);
}

TEST(Ops, MatmulValues) {
  Tensor<double> a({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor<double> b({3, 2}, {7, 8, 9, 10, 11, 12});
  auto c = ops::matmul(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 2}));
  EXPECT_DOUBLE_EQ(c.values()[0], 58);
  EXPECT_DOUBLE_EQ(c.values()[1], 64);
  EXPECT_DOUBLE_EQ(c.values()[2], 139);
  EXPECT_DOUBLE_EQ(c.values()[3], 154);
  EXPECT_THROW(ops::matmul(a, a), UsageError);
}

TEST(Ops, SoftmaxRowsSumToOne) {
  auto x = random_tensor({4, 7}, 1, 5.0);
  auto y = ops::softmax(x, 1);
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 7; ++c) s += y.values()[r * 7 + c];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Ops, GeluKnownValues) {
  Tensor<double> x({3}, {0.0, 1.0, -1.0});
  auto y = ops::gelu(x);
  EXPECT_DOUBLE_EQ(y.values()[0], 0.0);
  EXPECT_NEAR(y.values()[1], 0.8413447460685429, 1e-12);
  EXPECT_NEAR(y.values()[2], -0.15865525393145707, 1e-12);
}

TEST(Ops, CrossEntropyUniformLogits) {
  Tensor<double> logits({2, 4}, std::vector<double>(8, 0.0));
  std::vector<std::int32_t> targets = {1, 3};
  std::vector<std::uint8_t> ignore = {0, 0};
  EXPECT_NEAR(ops::cross_entropy(logits, targets, ignore).item(), std::log(4.0), 1e-12);
  std::vector<std::uint8_t> all = {1, 1};
  EXPECT_THROW(ops::cross_entropy(logits, targets, all), UsageError);
}

TEST(GradCheck, Add) {
  auto x = random_tensor({3, 4}, 2);
  const auto y = random_tensor({3, 4}, 3);
  auto r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
    return reduce(ops::add(a, y, t), t); }, x);
  EXPECT_LT(r.max_relative_error, kTol);
}

TEST(GradCheck, MulBothSides) {
  auto x = random_tensor({5}, 4);
  auto y = random_tensor({5}, 5);
  auto r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
    return reduce(ops::mul(a, a, t), t); }, x);
  EXPECT_LT(r.max_relative_error, kTol);
  r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
    return reduce(ops::mul(y, a, t), t); }, x);
  EXPECT_LT(r.max_relative_error, kTol);
}

TEST(GradCheck, Scale) {
  auto x = random_tensor({6}, 6);
  auto r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
    return reduce(ops::scale(a, -2.5, t), t); }, x);
  EXPECT_LT(r.max_relative_error, kTol);
}

TEST(GradCheck, MatmulAndTransposed) {
  auto a = random_tensor({3, 4}, 7);
  auto b = random_tensor({4, 5}, 8);
  auto bt = random_tensor({5, 4}, 9);
  auto r = finite_difference_check([&](GradTape<double>* t) { return reduce(ops::matmul(a, b, t), t); }, a);
  EXPECT_LT(r.max_relative_error, kTol);
  r = finite_difference_check([&](GradTape<double>* t) { return reduce(ops::matmul(a, b, t), t); }, b);
  EXPECT_LT(r.max_relative_error, kTol);
  r = finite_difference_check([&](GradTape<double>* t) { return reduce(ops::matmul_nt(a, bt, t), t); }, bt);
  EXPECT_LT(r.max_relative_error, kTol);
  r = finite_difference_check([&](GradTape<double>* t) { return reduce(ops::matmul_nt(a, bt, t), t); }, a);
  EXPECT_LT(r.max_relative_error, kTol);
}

TEST(GradCheck, Linear) {
  auto x = random_tensor({3, 4}, 10);
  auto w = random_tensor({4, 2}, 11);
  auto b = random_tensor({2}, 12);
  for (auto* target : {&x, &w, &b}) {
    auto r = finite_difference_check([&](GradTape<double>* t) { return reduce(ops::linear(x, w, b, t), t); },
                                     *target);
    EXPECT_LT(r.max_relative_error, kTol);
  }
}

TEST(GradCheck, Gelu) {
  auto x = random_tensor({10}, 13, 2.0);
  auto r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
    return reduce(ops::gelu(a, t), t); }, x);
  EXPECT_LT(r.max_relative_error, kTol);
}

TEST(GradCheck, SoftmaxBothAxes) {
  auto x = random_tensor({3, 5}, 14);
  for (std::size_t axis : {0u, 1u}) {
    auto r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
      return reduce(ops::softmax(a, axis, t), t); }, x);
    EXPECT_LT(r.max_relative_error, kTol) << "axis " << axis;
  }
}

TEST(GradCheck, LayerNorm) {
  auto x = random_tensor({4, 6}, 15);
  auto g = random_tensor({6}, 16);
  auto b = random_tensor({6}, 17);
  for (auto* target : {&x, &g, &b}) {
    auto r = finite_difference_check(
        [&](GradTape<double>* t) { return reduce(ops::layer_norm(x, g, b, 1e-5, t), t); }, *target);
    EXPECT_LT(r.max_relative_error, kTol);
  }
}

TEST(GradCheck, EmbeddingWithRepeatedIds) {
  auto table = random_tensor({5, 3}, 18);
  const std::vector<std::int32_t> ids = {1, 4, 1, 0};
  auto r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
    return reduce(ops::embedding(a, ids, t), t); }, table);
  EXPECT_LT(r.max_relative_error, kTol);
}

TEST(GradCheck, AttentionCausalAndBidirectionalWithPadding) {
  for (bool causal : {true, false}) {
    ops::AttentionLayout layout{2, 4, 2, {4, 3}, causal};
    auto qkv = random_tensor({8, 3 * 6}, 19);
    auto r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
      return reduce(ops::attention(a, layout, t), t); }, qkv);
    EXPECT_LT(r.max_relative_error, 1e-5) << (causal ? "causal" : "bidirectional");
  }
}

TEST(Ops, AttentionPaddedRowsAreZero) {
  ops::AttentionLayout layout{1, 4, 1, {2}, true};
  auto qkv = random_tensor({4, 6}, 20);
  auto y = ops::attention(qkv, layout);
  for (std::size_t i = 4; i < 8; ++i) EXPECT_EQ(y.values()[i], 0.0);
}

TEST(Ops, CausalAttentionIgnoresFutureTokens) {
  ops::AttentionLayout layout{1, 3, 1, {3}, true};
  auto qkv = random_tensor({3, 6}, 21);
  auto y1 = ops::attention(qkv, layout);
  auto changed = qkv.clone();
  for (std::size_t c = 0; c < 6; ++c) changed.values()[2 * 6 + c] += 1.0;
  auto y2 = ops::attention(changed, layout);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(y1.values()[i], y2.values()[i]);
}

TEST(GradCheck, CrossEntropyWithIgnoredRows) {
  auto logits = random_tensor({4, 6}, 22);
  const std::vector<std::int32_t> targets = {0, 5, 2, 3};
  const std::vector<std::uint8_t> ignore = {0, 1, 0, 0};
  auto r = finite_difference_check([&](const Tensor<double>& a, GradTape<double>* t) {
    return ops::cross_entropy(a, targets, ignore, t); }, logits);
  EXPECT_LT(r.max_relative_error, kTol);
}

}  // namespace
}  // namespace memlab
