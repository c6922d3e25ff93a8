// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "memlab/errors.hpp"
#include "memlab/harness.hpp"
#include "memlab/hashing.hpp"

namespace memlab {
namespace {

/// A plain training run derived from an experiment template.
RunConfig training_config(const RunConfig& base, const std::string& preset, const std::string& run_id) {
  RunConfig c = base;
  c.preset = preset;
  c.run_id = run_id;
  c.experiment = "train";
  c.taus = RunConfig{}.taus;
  c.forgetting = ForgettingOptions{};
  return c;
}

std::string seed_tag(const RunConfig& c) { return "s" + std::to_string(c.seed); }

void write_manifest(const std::filesystem::path& log_root, const std::string& experiment_id, const json& manifest) {
  const auto dir = log_root / experiment_id;
  std::filesystem::create_directories(dir / "figures");
  write_text_file(dir / "experiment.json", manifest.dump(2) + "\n");
}

std::string lr_tag(double lr) { return fmt::format("lr{:.3e}", lr); }

std::vector<std::uint64_t> sequence_hashes(std::span<const PackedSequence> seqs) {
  std::vector<std::uint64_t> out;
  for (const auto& s : seqs) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(s.ids.data() + s.prefix_len);
    out.push_back(fnv1a64(std::span(bytes, (s.ids.size() - s.prefix_len) * sizeof(std::int32_t))));
  }
  return out;
}

InjectionPlan injection_plan(const ForgettingOptions& o, std::size_t inject_epoch, std::size_t max_epochs,
                             std::vector<PackedSequence> special) {
  InjectionPlan plan;
  plan.special = std::move(special);
  if (o.period > 0) {
    for (std::size_t e = inject_epoch; e < max_epochs; e += o.period) plan.after_epochs.push_back(e);
  } else if (o.interleaved) {
    for (std::size_t k = 0; k < o.repetitions && inject_epoch + k < max_epochs; ++k) {
      plan.after_epochs.push_back(inject_epoch + k);
    }
  } else {
    plan.after_epochs.push_back(inject_epoch);
    plan.passes = o.repetitions;
  }
  return plan;
}

}  // namespace

std::vector<std::size_t> base_checkpoint_epochs(std::size_t max_epochs) {
  std::vector<std::size_t> out;
  for (double f : {0.2, 0.5, 0.8}) {
    const auto e = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(f * static_cast<double>(max_epochs))));
    if (e < max_epochs && (out.empty() || out.back() != e)) out.push_back(e);
  }
  return out;
}

std::size_t default_inject_epoch(std::size_t max_epochs) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(max_epochs))));
}

ScalingSweepResult run_scaling_sweep(const RunConfig& base, std::span<const std::string> presets,
                                     std::span<const double> taus, const std::filesystem::path& log_root,
                                     const std::string& experiment_id) {
  if (presets.empty() || taus.empty()) throw ConfigError("scaling sweep needs presets and taus");
  ScalingSweepResult out;
  out.presets.assign(presets.begin(), presets.end());
  out.taus.assign(taus.begin(), taus.end());
  const auto data = prepare_data(base.dataset);
  json runs = json::array();
  for (const auto& p : presets) {
    const auto cfg = training_config(base, p, experiment_id + "-" + p + "-" + seed_tag(base));
    auto r = run_or_load(cfg, data, log_root);
    const auto series = r.history.epoch_memorization();
    std::vector<ThresholdCrossing> row;
    for (double t : taus) row.push_back(threshold_crossing(series, t));
    out.table.push_back(std::move(row));
    runs.push_back(r.run_id);
    out.runs.push_back(std::move(r));
  }
  write_manifest(log_root, experiment_id,
                 {{"kind", "sweep-scale"}, {"presets", out.presets}, {"taus", out.taus}, {"runs", runs},
                  {"seed", base.seed}, {"task", to_string(base.task)}});
  return out;
}

LrSweepResult run_lr_sweep(const RunConfig& base, std::span<const std::string> presets,
                           std::span<const double> learning_rates, double tau, const std::filesystem::path& log_root,
                           const std::string& experiment_id) {
  if (presets.empty() || learning_rates.empty()) throw ConfigError("LR sweep needs presets and learning rates");
  LrSweepResult out;
  out.presets.assign(presets.begin(), presets.end());
  out.learning_rates.assign(learning_rates.begin(), learning_rates.end());
  out.tau = tau;
  const auto data = prepare_data(base.dataset);
  json runs = json::array();
  for (const auto& p : presets) {
    std::vector<RunResult> row_runs;
    std::vector<ThresholdCrossing> row;
    json row_ids = json::array();
    for (double lr : learning_rates) {
      auto cfg = training_config(base, p, experiment_id + "-" + p + "-" + lr_tag(lr) + "-" + seed_tag(base));
      cfg.max_lr = lr;
      RunResult r;
      try {
        r = run_or_load(cfg, data, log_root);
      } catch (const NumericError&) {
        // A divergent run counts as unreached; the partial log stays on disk.
        r = load_run(log_root / cfg.resolved_run_id());
      }
      const auto series = r.history.epoch_memorization();
      row.push_back(series.empty() ? ThresholdCrossing{tau, false, 0, 0, 0.0} : threshold_crossing(series, tau));
      row_ids.push_back(r.run_id);
      row_runs.push_back(std::move(r));
    }
    runs.push_back(row_ids);
    out.runs.push_back(std::move(row_runs));
    out.table.push_back(std::move(row));
  }
  write_manifest(log_root, experiment_id,
                 {{"kind", "sweep-lr"}, {"presets", out.presets}, {"learning_rates", out.learning_rates},
                  {"tau", tau}, {"runs", runs}, {"seed", base.seed}});
  return out;
}

DocIdExperimentResult run_docid_experiment(const RunConfig& base, const std::filesystem::path& log_root,
                                           const std::string& experiment_id) {
  DocIdExperimentResult out;
  out.arms = {DocIdMode::Control, DocIdMode::VocabOnly, DocIdMode::Prepend};
  json runs = json::array();
  json arms = json::array();
  for (auto mode : out.arms) {
    auto cfg = training_config(base, base.preset, experiment_id + "-" + to_string(mode) + "-" + seed_tag(base));
    cfg.dataset.docid = mode;
    cfg.dataset.reserve_docid_prefix = true;
    auto r = run_or_load(cfg, prepare_data(cfg.dataset), log_root);
    runs.push_back(r.run_id);
    arms.push_back(to_string(mode));
    out.runs.push_back(std::move(r));
  }
  write_manifest(log_root, experiment_id,
                 {{"kind", "docid"}, {"arms", arms}, {"runs", runs}, {"preset", base.preset}, {"seed", base.seed}});
  return out;
}

double ForgettingCurve::baseline() const {
  if (values.empty()) throw UsageError("empty forgetting curve");
  return *std::min_element(values.begin(), values.end());
}

std::vector<double> ForgettingCurve::diff() const {
  std::vector<double> d;
  for (std::size_t i = 1; i < values.size(); ++i) d.push_back(values[i] - values[i - 1]);
  return d;
}

ForgettingCurve forgetting_curve(const RunResult& run) {
  ForgettingCurve c;
  for (const auto& r : run.records) {
    const auto kind = r.at("kind").get<std::string>();
    if (kind != "inject" && kind != "special") continue;
    const auto index = r.at("index").get<std::size_t>();
    if (kind == "inject") c.injections.push_back(index);
    c.epochs.push_back(index);
    c.values.push_back(r.at("M").get<double>());
  }
  return c;
}

ForgettingResult run_forgetting(const RunConfig& base, const std::filesystem::path& log_root,
                                const std::string& experiment_id) {
  if (base.max_epochs == 0) throw ConfigError("forgetting runs need max_epochs");
  const auto data = prepare_data(base.dataset);

  const auto train_hashes = sequence_hashes(data->train);
  const std::set<std::uint64_t> seen(train_hashes.begin(), train_hashes.end());
  const auto special_hashes = sequence_hashes(data->valid);
  for (std::size_t i = 0; i < special_hashes.size(); ++i) {
    if (seen.count(special_hashes[i])) {
      throw UsageError("special batch sequence " + std::to_string(i) + " also occurs in the training data");
    }
  }

  ForgettingOptions opts = base.forgetting;
  if (opts.inject_epoch == 0) opts.inject_epoch = default_inject_epoch(base.max_epochs);
  if (opts.inject_epoch >= base.max_epochs) throw ConfigError("inject epoch must precede the final epoch");

  // One base run per training config serves every arm; it keeps checkpoints at
  // 20%, 50% and 80% of training plus any other requested injection epoch.
  RunConfig base_cfg = training_config(base, base.preset, "");
  base_cfg.checkpoint_every = 0;
  base_cfg.checkpoint_epochs = base_checkpoint_epochs(base.max_epochs);
  if (std::find(base_cfg.checkpoint_epochs.begin(), base_cfg.checkpoint_epochs.end(), opts.inject_epoch) ==
      base_cfg.checkpoint_epochs.end()) {
    base_cfg.checkpoint_epochs.push_back(opts.inject_epoch);
  }
  base_cfg.run_id = "forget-base-" + base.preset + "-" + seed_tag(base) + "-" + base_cfg.hash();

  ForgettingResult out;
  out.base = run_or_load(base_cfg, data, log_root);

  RunConfig cfg = base_cfg;
  cfg.experiment = "forget";
  cfg.forgetting = opts;
  cfg.run_id = experiment_id;
  const auto dir = log_root / cfg.resolved_run_id();
  bool reused = false;
  if (std::filesystem::exists(dir / "COMPLETE")) {
    auto existing = load_run(dir);
    if (existing.complete && existing.config_hash == cfg.hash()) {
      out.run = std::move(existing);
      reused = true;
    }
  }
  if (!reused) {
    Trainer trainer(cfg, data, log_root);
    trainer.set_injection(injection_plan(opts, opts.inject_epoch, cfg.max_epochs, data->valid));
    out.run = trainer.run(checkpoint_path(out.base.dir, opts.inject_epoch));
  }
  out.curve = forgetting_curve(out.run);
  write_manifest(log_root, cfg.resolved_run_id(),
                 {{"kind", "forget"},
                  {"base_run", out.base.run_id},
                  {"runs", json::array({out.run.run_id})},
                  {"presets", json::array({base.preset})},
                  {"forgetting", opts.to_json()},
                  {"seed", base.seed}});
  return out;
}

ForgettingSweepResult forgetting_baseline_vs_scale(const RunConfig& base, std::span<const std::string> presets,
                                                   const std::filesystem::path& log_root,
                                                   const std::string& experiment_id) {
  ForgettingSweepResult out;
  out.presets.assign(presets.begin(), presets.end());
  json runs = json::array();
  for (const auto& p : presets) {
    RunConfig c = base;
    c.preset = p;
    out.results.push_back(run_forgetting(c, log_root, experiment_id + "-" + p + "-" + seed_tag(base)));
    runs.push_back(out.results.back().run.run_id);
  }
  write_manifest(log_root, experiment_id,
                 {{"kind", "forget-scale"}, {"presets", out.presets}, {"runs", runs}, {"seed", base.seed},
                  {"forgetting", base.forgetting.to_json()}});
  return out;
}

RepetitionExperimentResult run_repetition_experiment(const RunConfig& base, std::span<const RepetitionArm> arms,
                                                     const std::filesystem::path& log_root,
                                                     const std::string& experiment_id) {
  RepetitionExperimentResult out;
  out.arms.assign(arms.begin(), arms.end());
  json runs = json::array();
  json labels = json::array();
  for (const auto& arm : arms) {
    RunConfig c = base;
    c.forgetting = arm.options;
    if (c.forgetting.inject_epoch == 0) c.forgetting.inject_epoch = base.forgetting.inject_epoch;
    std::string tag = arm.label;
    std::erase(tag, '=');
    out.results.push_back(run_forgetting(c, log_root, experiment_id + "-" + tag + "-" + seed_tag(base)));
    runs.push_back(out.results.back().run.run_id);
    labels.push_back(arm.label);
  }
  write_manifest(log_root, experiment_id,
                 {{"kind", "forget-repetition"}, {"arms", labels}, {"runs", runs}, {"preset", base.preset},
                  {"seed", base.seed}});
  return out;
}

}  // namespace memlab
