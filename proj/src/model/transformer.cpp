// SPDX-License-Identifier: Apache-2.0

#include "memlab/transformer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <tuple>

#include "memlab/errors.hpp"
#include "memlab/ops.hpp"

namespace memlab {

std::string to_string(Task task) { return task == Task::Causal ? "causal" : "masked"; }

Task task_from_string(std::string_view name) {
  if (name == "causal") return Task::Causal;
  if (name == "masked") return Task::Masked;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected causal|masked)");
}

void TransformerConfig::validate() const {
  if (d_model == 0 || n_heads == 0 || d_ffn == 0 || vocab_size == 0) {
    throw ConfigError("transformer extents must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                      std::to_string(n_heads));
  }
  if (max_seq_len < 2) throw ConfigError("max_seq_len must be at least 2");
  if (n_layers > 0 && d_model < 2) throw ConfigError("layer norm needs d_model >= 2");
}

std::size_t TransformerConfig::param_count() const {
  const std::size_t d = d_model;
  std::size_t n = vocab_size * d;
  if (learned_positions) n += max_seq_len * d;
  // ln1 + qkv + out + ln2 + fc + proj
  const std::size_t per_layer =
      2 * d + (3 * d * d + 3 * d) + (d * d + d) + 2 * d + (d * d_ffn + d_ffn) + (d_ffn * d + d);
  n += n_layers * per_layer;
  if (n_layers > 0) n += 2 * d;
  if (!tie_embeddings) n += vocab_size * d;
  return n;
}

json to_json(const TransformerConfig& c) {
  return json{{"n_layers", c.n_layers},       {"n_heads", c.n_heads},
              {"d_model", c.d_model},         {"d_ffn", c.d_ffn},
              {"vocab_size", c.vocab_size},   {"max_seq_len", c.max_seq_len},
              {"task", to_string(c.task)},    {"tie_embeddings", c.tie_embeddings},
              {"learned_positions", c.learned_positions}};
}

TransformerConfig transformer_config_from_json(const json& j) {
  TransformerConfig c;
  try {
    c.n_layers = j.value("n_layers", c.n_layers);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.d_model = j.value("d_model", c.d_model);
    c.d_ffn = j.value("d_ffn", 4 * c.d_model);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
    c.task = task_from_string(j.value("task", std::string("causal")));
    c.tie_embeddings = j.value("tie_embeddings", c.tie_embeddings);
    c.learned_positions = j.value("learned_positions", c.learned_positions);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad transformer config: ") + e.what());
  }
  return c;
}

namespace {

TransformerConfig make_config(std::size_t layers, std::size_t heads, std::size_t d, std::size_t vocab) {
  TransformerConfig c;
  c.n_layers = layers;
  c.n_heads = heads;
  c.d_model = d;
  c.d_ffn = 4 * d;
  c.vocab_size = vocab;
  return c;
}

std::vector<ModelPreset> build_presets() {
  constexpr std::size_t kPaperVocab = 50257;
  constexpr std::size_t kDeskVocab = 8192;
  std::vector<ModelPreset> p;
  p.push_back({"paper-125M", make_config(12, 12, 768, kPaperVocab), 6.0e-4, 500'000, true, true});
  p.push_back({"paper-355M", make_config(24, 16, 1024, kPaperVocab), 3.0e-4, 500'000, true, true});
  p.push_back({"paper-1.3B", make_config(24, 32, 2048, kPaperVocab), 2.0e-4, 1'000'000, true, true});
  p.push_back({"paper-2.7B", make_config(32, 32, 2560, kPaperVocab), 1.6e-4, 1'000'000, true, true});
  p.push_back({"paper-6.7B", make_config(32, 32, 4096, kPaperVocab), 1.2e-4, 2'000'000, true, true});
  p.push_back({"paper-13B", make_config(40, 40, 5120, kPaperVocab), 1.0e-4, 2'000'000, true, true});

  const std::pair<const char*, TransformerConfig> desk[] = {
      {"desk-tiny", make_config(2, 2, 64, kDeskVocab)},      {"desk-small", make_config(4, 4, 128, kDeskVocab)},
      {"desk-medium", make_config(6, 8, 256, kDeskVocab)},   {"desk-large", make_config(8, 8, 384, kDeskVocab)},
      {"desk-xlarge", make_config(10, 8, 512, kDeskVocab)},
  };
  for (const auto& [name, config] : desk) {
    p.push_back({name, config, 0.0, 32'768, false});
  }
  // Micro grid: one-core stand-ins for the desk grid used by the trend suite.
  // Learning rates come from a sweep on the synthetic corpus.
  const std::tuple<const char*, TransformerConfig, double> micro[] = {
      {"micro-1", make_config(2, 2, 16, kDeskVocab), 8.0e-3},
      {"micro-2", make_config(2, 2, 32, kDeskVocab), 6.0e-3},
      {"micro-3", make_config(2, 2, 48, kDeskVocab), 5.0e-3},
      {"micro-4", make_config(2, 2, 64, kDeskVocab), 4.0e-3},
      {"micro-5", make_config(2, 2, 96, kDeskVocab), 3.0e-3},
  };
  for (const auto& [name, config, lr] : micro) {
    p.push_back({name, config, lr, 4'096, false, true});
  }
  for (auto& preset : p) {
    if (preset.max_lr == 0.0) preset.max_lr = interpolated_max_lr(preset.config.param_count());
  }
  return p;
}

}  // namespace

const std::vector<ModelPreset>& model_presets() {
  static const std::vector<ModelPreset> presets = build_presets();
  return presets;
}

const ModelPreset& find_preset(std::string_view name) {
  for (const auto& p : model_presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown model preset '" + std::string(name) + "'");
}

double interpolated_max_lr(std::size_t param_count) {
  // (N, LR) of the paper-scale presets, N from the closed form.
  static const std::vector<std::pair<double, double>> table = [] {
    const std::pair<std::array<std::size_t, 3>, double> rows[] = {
        {{12, 12, 768}, 6.0e-4}, {{24, 16, 1024}, 3.0e-4}, {{24, 32, 2048}, 2.0e-4},
        {{32, 32, 2560}, 1.6e-4}, {{32, 32, 4096}, 1.2e-4}, {{40, 40, 5120}, 1.0e-4}};
    std::vector<std::pair<double, double>> t;
    for (const auto& [dims, lr] : rows) {
      t.emplace_back(std::log(static_cast<double>(make_config(dims[0], dims[1], dims[2], 50257).param_count())),
                     std::log(lr));
    }
    return t;
  }();
  const double x = std::log(static_cast<double>(std::max<std::size_t>(param_count, 1)));
  if (x <= table.front().first || x >= table.back().first) {
    double mx = 0, my = 0;
    for (const auto& [tx, ty] : table) {
      mx += tx;
      my += ty;
    }
    mx /= double(table.size());
    my /= double(table.size());
    double sxy = 0, sxx = 0;
    for (const auto& [tx, ty] : table) {
      sxy += (tx - mx) * (ty - my);
      sxx += (tx - mx) * (tx - mx);
    }
    const double slope = sxy / sxx;
    const auto& anchor = x <= table.front().first ? table.front() : table.back();
    return std::exp(anchor.second + slope * (x - anchor.first));
  }
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (x <= table[i].first) {
      const double f = (x - table[i - 1].first) / (table[i].first - table[i - 1].first);
      return std::exp(table[i - 1].second + f * (table[i].second - table[i - 1].second));
    }
  }
  return std::exp(table.back().second);
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>>> ModelState<T>::named_parameters() const {
  std::vector<std::pair<std::string, Tensor<T>>> out;
  out.emplace_back("token_embedding", token_embedding);
  if (position_embedding.defined()) out.emplace_back("position_embedding", position_embedding);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string p = "layers." + std::to_string(i) + ".";
    out.emplace_back(p + "ln1.gain", l.ln1_gain);
    out.emplace_back(p + "ln1.bias", l.ln1_bias);
    out.emplace_back(p + "attn.qkv.weight", l.qkv_weight);
    out.emplace_back(p + "attn.qkv.bias", l.qkv_bias);
    out.emplace_back(p + "attn.out.weight", l.out_weight);
    out.emplace_back(p + "attn.out.bias", l.out_bias);
    out.emplace_back(p + "ln2.gain", l.ln2_gain);
    out.emplace_back(p + "ln2.bias", l.ln2_bias);
    out.emplace_back(p + "mlp.fc.weight", l.fc_weight);
    out.emplace_back(p + "mlp.fc.bias", l.fc_bias);
    out.emplace_back(p + "mlp.proj.weight", l.proj_weight);
    out.emplace_back(p + "mlp.proj.bias", l.proj_bias);
  }
  if (final_gain.defined()) {
    out.emplace_back("final_ln.gain", final_gain);
    out.emplace_back("final_ln.bias", final_bias);
  }
  if (output_weight.defined()) out.emplace_back("output.weight", output_weight);
  return out;
}

template <typename T>
std::vector<Tensor<T>> ModelState<T>::parameters() const {
  std::vector<Tensor<T>> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

template <typename T>
void ModelState<T>::zero_grad() {
  for (auto& t : parameters()) t.zero_grad();
}

template <typename T>
ModelState<T> ModelState<T>::clone() const {
  ModelState copy = *this;
  auto cl = [](Tensor<T>& t) {
    if (t.defined()) t = t.clone();
  };
  cl(copy.token_embedding);
  cl(copy.position_embedding);
  for (auto& l : copy.layers) {
    for (auto* t : {&l.ln1_gain, &l.ln1_bias, &l.qkv_weight, &l.qkv_bias, &l.out_weight, &l.out_bias,
                    &l.ln2_gain, &l.ln2_bias, &l.fc_weight, &l.fc_bias, &l.proj_weight, &l.proj_bias}) {
      cl(*t);
    }
  }
  cl(copy.final_gain);
  cl(copy.final_bias);
  cl(copy.output_weight);
  return copy;
}

template <typename T>
ModelState<T> build_model(const TransformerConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t d = config.d_model, V = config.vocab_size, F = config.d_ffn;
  ModelState<T> m;
  m.config = config;
  m.seed = seed;
  auto zeros = [](Shape s) { return Tensor<T>(std::move(s), true); };
  auto ones = [](std::size_t n) { return Tensor<T>(Shape{n}, std::vector<T>(n, T(1)), true); };

  m.token_embedding = zeros({V, d});
  if (config.learned_positions) m.position_embedding = zeros({config.max_seq_len, d});
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    LayerParams<T> l;
    l.ln1_gain = ones(d);
    l.ln1_bias = zeros({d});
    l.qkv_weight = zeros({d, 3 * d});
    l.qkv_bias = zeros({3 * d});
    l.out_weight = zeros({d, d});
    l.out_bias = zeros({d});
    l.ln2_gain = ones(d);
    l.ln2_bias = zeros({d});
    l.fc_weight = zeros({d, F});
    l.fc_bias = zeros({F});
    l.proj_weight = zeros({F, d});
    l.proj_bias = zeros({d});
    m.layers.push_back(std::move(l));
  }
  if (config.n_layers > 0) {
    m.final_gain = ones(d);
    m.final_bias = zeros({d});
  }
  if (!config.tie_embeddings) m.output_weight = zeros({V, d});

  // Matrices (rank 2) are drawn in canonical parameter order; vectors keep
  // their constant init.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  for (auto& [name, t] : m.named_parameters()) {
    if (t.rank() != 2) continue;
    for (auto& v : t.values()) v = static_cast<T>(normal(rng));
  }
  return m;
}

TokenBatch TokenBatch::from_sequences(std::span<const std::span<const std::int32_t>> rows, std::int32_t pad_id) {
  TokenBatch b;
  b.batch = rows.size();
  for (const auto& r : rows) b.seq = std::max(b.seq, r.size());
  b.ids.assign(b.batch * b.seq, pad_id);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].empty()) throw InputError("empty sequence in batch");
    std::copy(rows[i].begin(), rows[i].end(), b.ids.begin() + static_cast<std::ptrdiff_t>(i * b.seq));
    b.lengths.push_back(rows[i].size());
  }
  return b;
}

template <typename T>
Tensor<T> forward(const ModelState<T>& model, const TokenBatch& batch, GradTape<T>* tape) {
  const auto& cfg = model.config;
  if (batch.batch == 0 || batch.seq == 0) throw InputError("empty batch");
  if (batch.seq > cfg.max_seq_len) {
    throw InputError("sequence length " + std::to_string(batch.seq) + " exceeds max_seq_len " +
                     std::to_string(cfg.max_seq_len));
  }
  if (batch.ids.size() != batch.batch * batch.seq || batch.lengths.size() != batch.batch) {
    throw InputError("malformed token batch");
  }
  for (std::size_t i = 0; i < batch.ids.size(); ++i) {
    const auto id = batch.ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw InputError("token id " + std::to_string(id) + " at offset " + std::to_string(i) +
                       " outside vocabulary of size " + std::to_string(cfg.vocab_size));
    }
  }

  auto x = ops::embedding(model.token_embedding, batch.ids, tape);
  if (cfg.learned_positions) {
    std::vector<std::int32_t> pos(batch.ids.size());
    for (std::size_t r = 0; r < batch.batch; ++r) {
      for (std::size_t t = 0; t < batch.seq; ++t) pos[r * batch.seq + t] = static_cast<std::int32_t>(t);
    }
    x = ops::add(x, ops::embedding(model.position_embedding, pos, tape), tape);
  }

  ops::AttentionLayout layout{batch.batch, batch.seq, cfg.n_heads, batch.lengths, cfg.task == Task::Causal};
  for (const auto& l : model.layers) {
    auto h = ops::layer_norm(x, l.ln1_gain, l.ln1_bias, T(1e-5), tape);
    auto qkv = ops::linear(h, l.qkv_weight, l.qkv_bias, tape);
    auto a = ops::attention(qkv, layout, tape);
    x = ops::add(x, ops::linear(a, l.out_weight, l.out_bias, tape), tape);
    h = ops::layer_norm(x, l.ln2_gain, l.ln2_bias, T(1e-5), tape);
    auto f = ops::gelu(ops::linear(h, l.fc_weight, l.fc_bias, tape), tape);
    x = ops::add(x, ops::linear(f, l.proj_weight, l.proj_bias, tape), tape);
  }
  if (!model.layers.empty()) x = ops::layer_norm(x, model.final_gain, model.final_bias, T(1e-5), tape);
  const auto& out_w = cfg.tie_embeddings ? model.token_embedding : model.output_weight;
  return ops::matmul_nt(x, out_w, tape);
}

template struct ModelState<float>;
template struct ModelState<double>;
template ModelState<float> build_model<float>(const TransformerConfig&, std::uint64_t);
template ModelState<double> build_model<double>(const TransformerConfig&, std::uint64_t);
template Tensor<float> forward<float>(const ModelState<float>&, const TokenBatch&, GradTape<float>*);
template Tensor<double> forward<double>(const ModelState<double>&, const TokenBatch&, GradTape<double>*);

}  // namespace memlab
