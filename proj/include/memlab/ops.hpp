// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "memlab/tensor.hpp"

/// Differentiable tensor operations.
///
/// Every op takes an optional tape. With a tape, and when at least one input
/// requires a gradient, the output requires a gradient and a backward rule is
/// recorded. Without a tape the op is a pure forward evaluation.
namespace memlab::ops {

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b, GradTape<T>* tape = nullptr);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b, GradTape<T>* tape = nullptr);

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor, GradTape<T>* tape = nullptr);

/// Sum of all elements, shape {1}.
template <typename T>
Tensor<T> sum(const Tensor<T>& a, GradTape<T>* tape = nullptr);

/// [n,k] x [k,m] -> [n,m]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, GradTape<T>* tape = nullptr);

/// [n,k] x [m,k]^T -> [n,m]; used for the tied output projection.
template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b, GradTape<T>* tape = nullptr);

/// x[n,in] * w[in,out] + bias[out]
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 GradTape<T>* tape = nullptr);

/// Exact GELU, x * Phi(x). Throws NumericError on non-finite input.
template <typename T>
Tensor<T> gelu(const Tensor<T>& x, GradTape<T>* tape = nullptr);

/// Max-subtracted softmax along `axis`.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis, GradTape<T>* tape = nullptr);

/// Normalizes over the last axis with population variance, then applies
/// gain and bias (both of the last extent).
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps = T(1e-5), GradTape<T>* tape = nullptr);

/// Row gather: out[i] = table[ids[i]].
template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const std::int32_t> ids,
                    GradTape<T>* tape = nullptr);

struct AttentionLayout {
  std::size_t batch = 0;
  std::size_t seq = 0;
  std::size_t heads = 0;
  /// Valid length of every batch row; keys and queries at or beyond it are padding.
  std::vector<std::size_t> lengths;
  bool causal = true;
};

/// Multi-head scaled dot-product attention over a fused projection
/// qkv[batch*seq, 3*d] laid out as [q | k | v]. Returns [batch*seq, d];
/// padded query rows are zero.
template <typename T>
Tensor<T> attention(const Tensor<T>& qkv, const AttentionLayout& layout,
                    GradTape<T>* tape = nullptr);

/// Mean negative log-softmax of the target over positions whose ignore flag
/// is zero. Leading axes of `logits` are flattened into positions.
/// Throws UsageError when every position is ignored.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const std::int32_t> targets,
                        std::span<const std::uint8_t> ignore, GradTape<T>* tape = nullptr);

}  // namespace memlab::ops
