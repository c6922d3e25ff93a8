// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memlab/jsonl.hpp"
#include "memlab/tensor.hpp"

namespace memlab {

enum class Task { Causal, Masked };

std::string to_string(Task task);
Task task_from_string(std::string_view name);

/// Architecture hyperparameters. param_count() is evaluated from the fields
/// on every call, so it can never go stale.
struct TransformerConfig {
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t d_model = 64;
  std::size_t d_ffn = 256;
  std::size_t vocab_size = 8192;
  std::size_t max_seq_len = 512;
  Task task = Task::Causal;
  bool tie_embeddings = true;
  bool learned_positions = true;

  /// Throws ConfigError on d_model % n_heads != 0, max_seq_len < 2, zero extents.
  void validate() const;
  std::size_t param_count() const;

  bool operator==(const TransformerConfig&) const = default;
};

json to_json(const TransformerConfig& config);
TransformerConfig transformer_config_from_json(const json& j);

struct ModelPreset {
  std::string name;
  TransformerConfig config;
  double max_lr = 0.0;
  std::size_t batch_tokens = 0;
  /// Paper-scale presets are bookkeeping only unless explicitly overridden.
  bool paper_scale = false;
  /// max_lr is used as given instead of following the parameter count.
  bool fixed_lr = false;
};

const std::vector<ModelPreset>& model_presets();
/// Throws ConfigError for unknown names.
const ModelPreset& find_preset(std::string_view name);

/// Max learning rate for a model of `param_count` parameters: log-log
/// interpolation between the paper-scale presets, extrapolated below the
/// smallest one along the least-squares log-log slope of the whole table.
double interpolated_max_lr(std::size_t param_count);

template <typename T>
struct LayerParams {
  Tensor<T> ln1_gain, ln1_bias;
  Tensor<T> qkv_weight, qkv_bias;
  Tensor<T> out_weight, out_bias;
  Tensor<T> ln2_gain, ln2_bias;
  Tensor<T> fc_weight, fc_bias;
  Tensor<T> proj_weight, proj_bias;
};

/// All learnable parameters of a pre-layer-norm transformer LM.
template <typename T>
struct ModelState {
  TransformerConfig config;
  std::uint64_t seed = 0;
  Tensor<T> token_embedding;      // [V, d]
  Tensor<T> position_embedding;   // [max_seq_len, d]; undefined without learned positions
  std::vector<LayerParams<T>> layers;
  Tensor<T> final_gain, final_bias;  // undefined when n_layers == 0
  Tensor<T> output_weight;           // [V, d]; undefined when embeddings are tied

  /// Canonical, stable order; names are checkpoint keys.
  std::vector<std::pair<std::string, Tensor<T>>> named_parameters() const;
  std::vector<Tensor<T>> parameters() const;
  void zero_grad();
  ModelState clone() const;
};

/// Seeded normal(0, 0.02) weights, zero biases, unit layer-norm gains.
/// Throws ConfigError for an invalid config.
template <typename T>
ModelState<T> build_model(const TransformerConfig& config, std::uint64_t seed);

/// Right-padded token matrix.
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t seq = 0;
  std::vector<std::int32_t> ids;      // batch * seq
  std::vector<std::size_t> lengths;   // valid prefix per row

  static TokenBatch from_sequences(std::span<const std::span<const std::int32_t>> rows,
                                   std::int32_t pad_id = 0);
};

/// Teacher-forced logits, shape [batch*seq, V] (row-major over batch then
/// position). Causal configs use strict lower-triangular attention; masked
/// configs attend bidirectionally over each row's valid prefix.
/// Throws InputError for sequences longer than max_seq_len or ids >= V.
template <typename T>
Tensor<T> forward(const ModelState<T>& model, const TokenBatch& batch, GradTape<T>* tape = nullptr);

extern template struct ModelState<float>;
extern template struct ModelState<double>;

}  // namespace memlab
