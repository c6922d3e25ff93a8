// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <set>

#include "memlab/errors.hpp"
#include "memlab/harness.hpp"
#include "memlab/hashing.hpp"

namespace memlab {
namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string mask_strategy_name(MaskStrategy s) { return s == MaskStrategy::MaskOnly ? "mask-only" : "80-10-10"; }

MaskStrategy mask_strategy_from(const std::string& s) {
  if (s == "mask-only") return MaskStrategy::MaskOnly;
  if (s == "80-10-10") return MaskStrategy::Bert80_10_10;
  throw ConfigError("unknown mask strategy '" + s + "' (mask-only, 80-10-10)");
}

json synthetic_to_json(const SyntheticCorpusOptions& o) {
  return {{"nouns", o.nouns},
          {"proper_nouns", o.proper_nouns},
          {"verbs", o.verbs},
          {"adjectives", o.adjectives},
          {"min_sentences", o.min_sentences},
          {"max_sentences", o.max_sentences},
          {"topic_items", o.topic_items},
          {"topic_reuse", o.topic_reuse},
          {"zipf_exponent", o.zipf_exponent},
          {"open_class_exponent", o.open_class_exponent},
          {"seed", o.seed}};
}

SyntheticCorpusOptions synthetic_from_json(const json& j) {
  reject_unknown(j,
                 {"nouns", "proper_nouns", "verbs", "adjectives", "min_sentences", "max_sentences", "topic_items",
                  "topic_reuse", "zipf_exponent", "open_class_exponent", "seed"},
                 "dataset.synthetic");
  SyntheticCorpusOptions o;
  read(j, "nouns", o.nouns);
  read(j, "proper_nouns", o.proper_nouns);
  read(j, "verbs", o.verbs);
  read(j, "adjectives", o.adjectives);
  read(j, "min_sentences", o.min_sentences);
  read(j, "max_sentences", o.max_sentences);
  read(j, "topic_items", o.topic_items);
  read(j, "topic_reuse", o.topic_reuse);
  read(j, "zipf_exponent", o.zipf_exponent);
  read(j, "open_class_exponent", o.open_class_exponent);
  read(j, "seed", o.seed);
  return o;
}

}  // namespace

json DatasetConfig::to_json() const {
  json j = {{"source", source},
            {"vocab_size", vocab_size},
            {"min_freq", min_freq},
            {"max_seq_len", max_seq_len},
            {"docid", memlab::to_string(docid)},
            {"reserve_docid_prefix", reserve_docid_prefix}};
  if (source == "synthetic") {
    j["synthetic"] = synthetic_to_json(synthetic);
    j["train_documents"] = train_documents;
    j["valid_documents"] = valid_documents;
  } else {
    j["train_path"] = train_path;
    j["valid_path"] = valid_path;
    j["train_pos_path"] = train_pos_path;
  }
  return j;
}

DatasetConfig DatasetConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"source", "train_path", "valid_path", "train_pos_path", "synthetic", "train_documents",
                  "valid_documents", "vocab_size", "min_freq", "max_seq_len", "docid", "reserve_docid_prefix"},
                 "dataset");
  DatasetConfig d;
  read(j, "source", d.source);
  read(j, "train_path", d.train_path);
  read(j, "valid_path", d.valid_path);
  read(j, "train_pos_path", d.train_pos_path);
  if (j.contains("synthetic")) d.synthetic = synthetic_from_json(j["synthetic"]);
  read(j, "train_documents", d.train_documents);
  read(j, "valid_documents", d.valid_documents);
  read(j, "vocab_size", d.vocab_size);
  read(j, "min_freq", d.min_freq);
  read(j, "max_seq_len", d.max_seq_len);
  std::string mode = "control";
  read(j, "docid", mode);
  d.docid = docid_mode_from_string(mode);
  read(j, "reserve_docid_prefix", d.reserve_docid_prefix);
  return d;
}

std::size_t DatasetConfig::packing_budget() const {
  const bool reserve = reserve_docid_prefix || docid == DocIdMode::Prepend;
  if (reserve && max_seq_len <= kDocIdPrefixLength) throw ConfigError("max_seq_len too small for a docid prefix");
  return reserve ? max_seq_len - kDocIdPrefixLength : max_seq_len;
}

json ForgettingOptions::to_json() const {
  return {{"inject_epoch", inject_epoch}, {"repetitions", repetitions}, {"period", period}, {"interleaved", interleaved}};
}

ForgettingOptions ForgettingOptions::from_json(const json& j) {
  reject_unknown(j, {"inject_epoch", "repetitions", "period", "interleaved"}, "forgetting");
  ForgettingOptions o;
  read(j, "inject_epoch", o.inject_epoch);
  read(j, "repetitions", o.repetitions);
  read(j, "period", o.period);
  read(j, "interleaved", o.interleaved);
  return o;
}

const ModelPreset& RunConfig::base_preset() const { return find_preset(preset); }

TransformerConfig RunConfig::model_config(std::size_t vocab_size) const {
  TransformerConfig c = base_preset().config;
  if (n_layers) c.n_layers = n_layers;
  if (n_heads) c.n_heads = n_heads;
  if (d_model) {
    c.d_model = d_model;
    c.d_ffn = 4 * d_model;
  }
  if (d_ffn) c.d_ffn = d_ffn;
  c.vocab_size = vocab_size;
  c.max_seq_len = dataset.max_seq_len;
  c.task = task;
  c.tie_embeddings = tie_embeddings;
  c.validate();
  return c;
}

double RunConfig::resolved_max_lr(std::size_t param_count) const {
  if (max_lr > 0.0) return max_lr;
  const auto& p = base_preset();
  if (p.fixed_lr) return p.max_lr;
  return interpolated_max_lr(param_count);
}

std::size_t RunConfig::resolved_batch_tokens() const {
  return batch_tokens > 0 ? batch_tokens : base_preset().batch_tokens;
}

void RunConfig::validate() const {
  const auto& p = base_preset();
  if (p.paper_scale && !allow_paper_scale) {
    throw ConfigError("preset '" + preset + "' is paper-scale; pass allow_paper_scale to train it");
  }
  if ((max_epochs > 0) == (max_updates > 0)) {
    throw ConfigError("set exactly one stopping criterion: max_epochs or max_updates");
  }
  if (!(max_lr >= 0.0) || !std::isfinite(max_lr)) throw ConfigError("max_lr must be finite and >= 0");
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must lie in (0, 1)");
  if (eval_every == 0) throw ConfigError("eval_every must be >= 1");
  if (!(mask_probability > 0.0 && mask_probability <= 1.0)) throw ConfigError("mask_probability must lie in (0, 1]");
  if (!(early_exit_memorization >= 0.0 && early_exit_memorization <= 1.0)) {
    throw ConfigError("early_exit_memorization must lie in [0, 1]");
  }
  if (dataset.max_seq_len == 0 || dataset.vocab_size <= Vocabulary::kNumReserved) {
    throw ConfigError("dataset needs max_seq_len > 0 and vocab_size > 4");
  }
  if (dataset.source != "synthetic" && dataset.source != "files") {
    throw ConfigError("dataset.source must be 'synthetic' or 'files'");
  }
  if (dataset.source == "files" && (dataset.train_path.empty() || dataset.valid_path.empty())) {
    throw ConfigError("dataset.source 'files' needs train_path and valid_path");
  }
  for (double t : taus) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("every tau must lie in (0, 1)");
  }
  if (forgetting.repetitions == 0) throw ConfigError("forgetting.repetitions must be >= 1");
  if (forgetting.period > 0 && forgetting.repetitions > 1) {
    throw ConfigError("forgetting: choose either repetitions > 1 or a spacing period, not both");
  }
  if (max_epochs > 0 && forgetting.inject_epoch >= max_epochs && experiment == "forget") {
    throw ConfigError("forgetting.inject_epoch must precede max_epochs");
  }
  model_config(dataset.vocab_size);
}

json RunConfig::to_json() const {
  json j = {{"run_id", run_id},
            {"preset", preset},
            {"n_layers", n_layers},
            {"n_heads", n_heads},
            {"d_model", d_model},
            {"d_ffn", d_ffn},
            {"task", memlab::to_string(task)},
            {"tie_embeddings", tie_embeddings},
            {"dataset", dataset.to_json()},
            {"seed", seed},
            {"max_epochs", max_epochs},
            {"max_updates", max_updates},
            {"batch_tokens", batch_tokens},
            {"max_lr", max_lr},
            {"warmup_fraction", warmup_fraction},
            {"eval_every", eval_every},
            {"checkpoint_every", checkpoint_every},
            {"checkpoint_epochs", checkpoint_epochs},
            {"early_exit_memorization", early_exit_memorization},
            {"eval_mask_seed", eval_mask_seed},
            {"mask_probability", mask_probability},
            {"mask_strategy", mask_strategy_name(mask_strategy)},
            {"allow_paper_scale", allow_paper_scale},
            {"record_wall_time", record_wall_time},
            {"log_updates", log_updates},
            {"experiment", experiment},
            {"taus", taus},
            {"forgetting", forgetting.to_json()}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"run_id", "preset", "n_layers", "n_heads", "d_model", "d_ffn", "task", "tie_embeddings", "dataset",
                  "seed", "max_epochs", "max_updates", "batch_tokens", "max_lr", "warmup_fraction", "eval_every",
                  "checkpoint_every", "checkpoint_epochs", "early_exit_memorization", "eval_mask_seed",
                  "mask_probability", "mask_strategy", "allow_paper_scale", "record_wall_time", "log_updates",
                  "experiment", "taus", "forgetting"},
                 "run config");
  RunConfig c;
  read(j, "run_id", c.run_id);
  read(j, "preset", c.preset);
  read(j, "n_layers", c.n_layers);
  read(j, "n_heads", c.n_heads);
  read(j, "d_model", c.d_model);
  read(j, "d_ffn", c.d_ffn);
  std::string task = "causal";
  read(j, "task", task);
  try {
    c.task = task_from_string(task);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  read(j, "tie_embeddings", c.tie_embeddings);
  if (j.contains("dataset")) c.dataset = DatasetConfig::from_json(j["dataset"]);
  read(j, "seed", c.seed);
  read(j, "max_epochs", c.max_epochs);
  read(j, "max_updates", c.max_updates);
  read(j, "batch_tokens", c.batch_tokens);
  read(j, "max_lr", c.max_lr);
  read(j, "warmup_fraction", c.warmup_fraction);
  read(j, "eval_every", c.eval_every);
  read(j, "checkpoint_every", c.checkpoint_every);
  read(j, "checkpoint_epochs", c.checkpoint_epochs);
  read(j, "early_exit_memorization", c.early_exit_memorization);
  read(j, "eval_mask_seed", c.eval_mask_seed);
  read(j, "mask_probability", c.mask_probability);
  std::string strategy = "mask-only";
  read(j, "mask_strategy", strategy);
  c.mask_strategy = mask_strategy_from(strategy);
  read(j, "allow_paper_scale", c.allow_paper_scale);
  read(j, "record_wall_time", c.record_wall_time);
  read(j, "log_updates", c.log_updates);
  read(j, "experiment", c.experiment);
  read(j, "taus", c.taus);
  if (j.contains("forgetting")) c.forgetting = ForgettingOptions::from_json(j["forgetting"]);
  return c;
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("run_id");
  return hex64(fnv1a64(canonical_json(j)));
}

std::string RunConfig::resolved_run_id() const { return run_id.empty() ? "run-" + hash() : run_id; }

}  // namespace memlab
