// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>

#include "memlab/errors.hpp"
#include "memlab/harness.hpp"
#include "memlab/hashing.hpp"
#include "memlab/ops.hpp"

namespace memlab {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kOrderStream = 0xe90c;
constexpr std::uint64_t kTrainMaskStream = 0x3a5c;
constexpr std::uint64_t kInjectStream = 0x1a7ec7;

/// Loss targets for one batch. `scored` marks the positions that count
/// toward M_update (the docid prefix is trained on but never scored).
struct BatchTargets {
  TokenBatch batch;
  std::vector<std::int32_t> targets;
  std::vector<std::uint8_t> ignore;
  std::vector<std::uint8_t> scored;
  std::size_t tokens = 0;
  std::size_t trained = 0;
  std::size_t n_scored = 0;
};

BatchTargets make_batch(std::span<const PackedSequence> seqs, std::span<const std::size_t> members, Task task,
                        const MaskOptions& mask, std::uint64_t mask_seed) {
  BatchTargets bt;
  std::vector<std::vector<std::int32_t>> inputs;
  std::vector<std::optional<MaskLayout>> layouts;
  for (auto i : members) {
    const auto& s = seqs[i];
    bt.tokens += s.ids.size();
    if (task == Task::Causal) {
      inputs.push_back(s.ids);
      layouts.emplace_back();
    } else {
      auto m = apply_mlm_mask(s, mask_seed, i, mask);
      inputs.push_back(std::move(m.ids));
      layouts.push_back(std::move(m.mask));
    }
  }
  std::vector<std::span<const std::int32_t>> rows(inputs.begin(), inputs.end());
  bt.batch = TokenBatch::from_sequences(rows, Vocabulary::kPad);
  const std::size_t S = bt.batch.seq;
  const std::size_t n = bt.batch.batch * S;
  bt.targets.assign(n, 0);
  bt.ignore.assign(n, 1);
  bt.scored.assign(n, 0);
  for (std::size_t b = 0; b < members.size(); ++b) {
    const auto& s = seqs[members[b]];
    if (task == Task::Causal) {
      const std::size_t first_scored = std::max<std::size_t>(1, s.prefix_len);
      for (std::size_t t = 0; t + 1 < s.ids.size(); ++t) {
        bt.targets[b * S + t] = s.ids[t + 1];
        bt.ignore[b * S + t] = 0;
        bt.scored[b * S + t] = t + 1 >= first_scored ? 1 : 0;
      }
    } else {
      const auto& layout = *layouts[b];
      for (std::size_t k = 0; k < layout.positions.size(); ++k) {
        const auto p = layout.positions[k];
        bt.targets[b * S + p] = layout.originals[k];
        bt.ignore[b * S + p] = 0;
        bt.scored[b * S + p] = 1;
      }
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    bt.trained += bt.ignore[r] ? 0 : 1;
    bt.n_scored += bt.scored[r];
  }
  return bt;
}

json per_pos_json(const std::map<PosTag, PosRatio>& ratios) {
  json j = json::object();
  for (const auto& [tag, r] : ratios) j[std::string(to_string(tag))] = {r.r, r.r_mem};
  return j;
}

std::uint64_t planned_total_tokens(const RunConfig& cfg, const PreparedData& data, std::size_t batch_tokens) {
  if (cfg.max_epochs > 0) return static_cast<std::uint64_t>(cfg.max_epochs) * data.train_tokens;
  std::uint64_t total = 0;
  std::size_t updates = 0;
  for (std::size_t epoch = 1; updates < cfg.max_updates; ++epoch) {
    for (const auto& b : plan_batches(data.train, batch_tokens, seed_for(cfg.seed, kOrderStream, epoch))) {
      if (updates == cfg.max_updates) break;
      for (auto i : b) total += data.train[i].ids.size();
      ++updates;
    }
  }
  return total;
}

bool keep_on_resume(const json& r, const TrainingCounters& c) {
  const auto kind = r.at("kind").get<std::string>();
  const auto index = r.at("index").get<std::uint64_t>();
  if (kind == "update") return index <= c.update;
  if (kind == "inject") return index < c.epoch;
  return index <= c.epoch;
}

void write_complete_marker(const std::filesystem::path& dir, const std::string& config_hash) {
  const auto text = read_text_file(dir / "metrics.jsonl");
  json marker = {{"config_hash", config_hash}, {"metrics_fnv1a64", hex64(fnv1a64(text))}};
  write_text_file(dir / "COMPLETE", canonical_json(marker) + "\n");
}

RunResult assemble(const std::filesystem::path& dir, std::vector<json> records, const std::string& config_hash,
                   std::size_t param_count) {
  RunResult r;
  r.dir = dir;
  r.run_id = dir.filename().string();
  r.config_hash = config_hash;
  r.param_count = param_count;
  r.history.param_count = param_count;
  r.history.config_hash = config_hash;
  for (const auto& rec : records) {
    const auto kind = rec.at("kind").get<std::string>();
    if (kind == "epoch") {
      r.history.add_epoch({rec.at("index").get<std::size_t>(), rec.at("M").get<double>(),
                           rec.at("ppl_val").is_null() ? 0.0 : rec.at("ppl_val").get<double>()});
      r.counters.epoch = rec.at("index").get<std::uint64_t>();
      r.counters.tokens_processed = rec.at("tokens_processed").get<std::uint64_t>();
    } else if (kind == "update") {
      r.history.add_update({rec.at("index").get<std::size_t>(), rec.at("M").get<double>()});
      r.counters.update = rec.at("index").get<std::uint64_t>();
    }
  }
  r.records = std::move(records);
  return r;
}

}  // namespace

std::vector<json> RunResult::of_kind(std::string_view kind) const {
  std::vector<json> out;
  for (const auto& r : records) {
    if (r.at("kind").get<std::string>() == kind) out.push_back(r);
  }
  return out;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir, std::size_t epoch) {
  char name[32];
  std::snprintf(name, sizeof(name), "epoch-%05zu.ckpt", epoch);
  return run_dir / "checkpoints" / name;
}

std::filesystem::path default_log_root() {
  if (const char* env = std::getenv("MEMLAB_LOG_ROOT"); env != nullptr && *env != '\0') return env;
  return "runs";
}

Trainer::Trainer(RunConfig config, std::shared_ptr<const PreparedData> data, std::filesystem::path log_root)
    : config_(std::move(config)), data_(std::move(data)), log_root_(std::move(log_root)) {
  if (!data_) throw UsageError("trainer needs prepared data");
}

void Trainer::set_injection(InjectionPlan plan) {
  if (plan.special.empty()) throw UsageError("injection plan without special sequences");
  if (plan.passes == 0) throw UsageError("injection plan needs at least one pass");
  if (!std::is_sorted(plan.after_epochs.begin(), plan.after_epochs.end())) {
    throw UsageError("injection epochs must be ascending");
  }
  injection_ = std::move(plan);
}

std::filesystem::path Trainer::run_dir() const { return log_root_ / config_.resolved_run_id(); }

RunResult Trainer::run(const std::optional<std::filesystem::path>& checkpoint) {
  config_.validate();
  const auto& data = *data_;
  const auto start_time = std::chrono::steady_clock::now();
  const std::string run_id = config_.resolved_run_id();
  const std::string config_hash = config_.hash();
  const auto dir = run_dir();
  std::filesystem::create_directories(dir / "checkpoints");
  std::filesystem::create_directories(dir / "figures");
  std::filesystem::remove(dir / "COMPLETE");

  const TransformerConfig mc = config_.model_config(data.vocab.size());
  const std::size_t params = mc.param_count();
  const std::size_t batch_tokens = config_.resolved_batch_tokens();
  const LrSchedule schedule = LrSchedule::with_warmup_fraction(
      config_.resolved_max_lr(params), planned_total_tokens(config_, data, batch_tokens), config_.warmup_fraction);

  json resolved = config_.to_json();
  resolved["run_id"] = run_id;
  resolved["resolved"] = {{"config_hash", config_hash},
                          {"model", to_json(mc)},
                          {"param_count", params},
                          {"max_lr", schedule.max_lr},
                          {"batch_tokens", batch_tokens},
                          {"warmup_tokens", schedule.warmup_tokens},
                          {"total_tokens", schedule.total_tokens},
                          {"vocab_hash", hex64(data.vocab.hash())},
                          {"train_sequences", data.train.size()},
                          {"train_tokens", data.train_tokens},
                          {"mean_train_length", mean_sequence_length(data.train)}};
  if (injection_) {
    resolved["resolved"]["injection"] = {{"after_epochs", injection_->after_epochs},
                                         {"passes", injection_->passes},
                                         {"special_sequences", injection_->special.size()}};
  }
  write_text_file(dir / "config.resolved.json", resolved.dump(2) + "\n");
  write_text_file(dir / "dataset.manifest.json", canonical_json(data.manifest(config_.eval_mask_seed)) + "\n");

  ModelState<float> model;
  AdamState<float> adam;
  TrainingCounters counters;
  std::vector<json> records;
  if (checkpoint) {
    Checkpoint ck = load_checkpoint(*checkpoint);
    if (!(ck.model.config == mc)) throw ConfigError("checkpoint model config differs from the run config");
    model = std::move(ck.model);
    adam = std::move(ck.adam);
    counters = ck.counters;
    const bool same_run = std::filesystem::weakly_canonical(*checkpoint).parent_path().parent_path() ==
                          std::filesystem::weakly_canonical(dir);
    if (same_run && std::filesystem::exists(dir / "metrics.jsonl")) {
      for (auto& r : read_jsonl(dir / "metrics.jsonl")) {
        if (keep_on_resume(r, counters)) records.push_back(std::move(r));
      }
    }
  } else {
    model = build_model<float>(mc, seed_for(config_.seed, kInitStream));
    adam = AdamState<float>::for_parameters(model.parameters());
  }
  JsonlWriter log(dir / "metrics.jsonl", true);
  for (const auto& r : records) log.append(r);

  const MaskOptions mask{config_.mask_probability, config_.mask_strategy, data.vocab.size()};
  const ContextOptions ctx_opts{config_.eval_mask_seed, mask};
  const ContextSet train_ctx = extract_contexts(data.train, config_.task, ctx_opts);
  const ContextSet valid_ctx = extract_contexts(data.valid, config_.task, ctx_opts);
  std::optional<ContextSet> special_ctx;
  if (injection_) special_ctx = extract_contexts(injection_->special, config_.task, ctx_opts);

  auto params_list = model.parameters();
  std::vector<std::string> names;
  for (const auto& [name, t] : model.named_parameters()) names.push_back(name);

  auto wall = [&]() -> json {
    if (!config_.record_wall_time) return nullptr;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  };
  auto base_record = [&](const char* kind, std::uint64_t index) {
    return json{{"run_id", run_id}, {"kind", kind},      {"index", index},      {"M", nullptr},
                {"ppl_val", nullptr}, {"per_pos", nullptr}, {"mean_L", nullptr}, {"tokens_processed", counters.tokens_processed},
                {"wall_time", wall()}};
  };

  // One optimizer step; returns M_update or nullopt when nothing was trainable.
  auto step = [&](const BatchTargets& bt, double lr, std::uint64_t index) -> std::optional<double> {
    if (bt.trained == 0) return std::nullopt;
    model.zero_grad();
    GradTape<float> tape;
    auto logits = forward<float>(model, bt.batch, &tape);
    auto loss = ops::cross_entropy<float>(logits, bt.targets, bt.ignore, &tape);
    if (!std::isfinite(loss.item())) {
      throw NumericError("non-finite training loss at update " + std::to_string(index));
    }
    std::optional<double> m;
    if (bt.n_scored > 0) m = update_memorization(logits.values(), mc.vocab_size, bt.targets, bt.scored);
    tape.backward(loss);
    adam_step<float>(params_list, adam, lr, names);
    return m;
  };

  auto evaluate_special = [&](const char* kind, std::uint64_t index) {
    auto rec = base_record(kind, index);
    rec["M"] = exact_memorization(model, *special_ctx);
    log.append(rec);
    records.push_back(rec);
  };

  auto inject = [&](std::size_t after_epoch) {
    const double lr = schedule.lr_at(counters.tokens_processed);
    for (std::size_t pass = 0; pass < injection_->passes; ++pass) {
      const auto plan = plan_batches(injection_->special, batch_tokens,
                                     seed_for(config_.seed, kInjectStream, after_epoch * 1000 + pass));
      const auto mask_seed = seed_for(config_.seed, kInjectStream ^ kTrainMaskStream, after_epoch * 1000 + pass);
      for (const auto& members : plan) {
        step(make_batch(injection_->special, members, config_.task, mask, mask_seed), lr, counters.update);
      }
    }
    evaluate_special("inject", after_epoch);
  };

  const bool by_updates = config_.max_updates > 0;
  bool injected_once = injection_ && std::any_of(injection_->after_epochs.begin(), injection_->after_epochs.end(),
                                                 [&](std::size_t e) { return e < counters.epoch; });
  bool stop = false;
  while (!stop) {
    if (!by_updates && counters.epoch >= config_.max_epochs) break;
    if (by_updates && counters.update >= config_.max_updates) break;
    if (injection_ && std::binary_search(injection_->after_epochs.begin(), injection_->after_epochs.end(),
                                         static_cast<std::size_t>(counters.epoch))) {
      inject(counters.epoch);
      injected_once = true;
    }
    const std::uint64_t epoch = counters.epoch + 1;
    const auto plan = plan_batches(data.train, batch_tokens, seed_for(config_.seed, kOrderStream, epoch));
    const auto mask_seed = seed_for(config_.seed, kTrainMaskStream, epoch);
    for (const auto& members : plan) {
      if (by_updates && counters.update >= config_.max_updates) break;
      const auto bt = make_batch(data.train, members, config_.task, mask, mask_seed);
      const std::uint64_t next_tokens = counters.tokens_processed + bt.tokens;
      const auto m = step(bt, schedule.lr_at(next_tokens), counters.update + 1);
      counters.tokens_processed = next_tokens;
      ++counters.update;
      if (m && config_.log_updates) {
        auto rec = base_record("update", counters.update);
        rec["M"] = *m;
        log.append(rec);
        records.push_back(rec);
      }
    }
    counters.epoch = epoch;

    const bool last = by_updates ? counters.update >= config_.max_updates : epoch >= config_.max_epochs;
    if (epoch % config_.eval_every == 0 || last) {
      const auto preds = predict_contexts(model, train_ctx);
      auto rec = base_record("epoch", epoch);
      const double m = exact_memorization(train_ctx, preds);
      rec["M"] = m;
      rec["ppl_val"] = perplexity(model, valid_ctx);
      if (train_ctx.tagged() && data.lexicon) {
        const auto tags = tag_predictions(train_ctx, preds, data.vocab, *data.lexicon);
        rec["per_pos"] = per_pos_json(pos_ratios(train_ctx, preds, tags));
      }
      if (config_.task == Task::Causal) {
        rec["mean_L"] = memory_unit_lengths(memorization_bitmaps(train_ctx, preds)).mean_length;
      }
      log.append(rec);
      records.push_back(rec);
      if (config_.early_exit_memorization > 0.0 && m >= config_.early_exit_memorization) stop = true;
    }
    if (injected_once) evaluate_special("special", epoch);

    const bool cadence = config_.checkpoint_every > 0 && epoch % config_.checkpoint_every == 0;
    const bool listed = std::find(config_.checkpoint_epochs.begin(), config_.checkpoint_epochs.end(), epoch) !=
                        config_.checkpoint_epochs.end();
    if (cadence || listed || last || stop) {
      save_checkpoint(checkpoint_path(dir, epoch), model, adam, counters,
                      {{"run_id", run_id}, {"config_hash", config_hash}});
    }
  }

  write_complete_marker(dir, config_hash);
  auto result = assemble(dir, std::move(records), config_hash, params);
  result.counters = counters;
  result.complete = true;
  return result;
}

RunResult load_run(const std::filesystem::path& dir) {
  const json resolved = json::parse(read_text_file(dir / "config.resolved.json"));
  const auto& res = resolved.at("resolved");
  auto result = assemble(dir, read_jsonl(dir / "metrics.jsonl"), res.at("config_hash").get<std::string>(),
                         res.at("param_count").get<std::size_t>());
  if (std::filesystem::exists(dir / "COMPLETE")) {
    const json marker = json::parse(read_text_file(dir / "COMPLETE"));
    const auto text = read_text_file(dir / "metrics.jsonl");
    result.complete = marker.at("metrics_fnv1a64").get<std::string>() == hex64(fnv1a64(text)) &&
                      marker.at("config_hash").get<std::string>() == result.config_hash;
  }
  return result;
}

RunResult run_or_load(const RunConfig& config, std::shared_ptr<const PreparedData> data,
                      const std::filesystem::path& log_root) {
  const auto dir = log_root / config.resolved_run_id();
  if (std::filesystem::exists(dir / "COMPLETE") && std::filesystem::exists(dir / "config.resolved.json")) {
    auto existing = load_run(dir);
    if (existing.complete && existing.config_hash == config.hash()) return existing;
  }
  Trainer trainer(config, std::move(data), log_root);
  return trainer.run();
}

}  // namespace memlab
