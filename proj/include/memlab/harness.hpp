// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memlab/checkpoint.hpp"
#include "memlab/corpus.hpp"
#include "memlab/jsonl.hpp"
#include "memlab/metrics.hpp"
#include "memlab/optimizer.hpp"

namespace memlab {

// ---------------------------------------------------------------------------
// Configuration

struct DatasetConfig {
  /// "synthetic" renders the built-in generator; "files" reads train/valid
  /// text (and an optional annotation file for the training text).
  std::string source = "synthetic";
  std::string train_path;
  std::string valid_path;
  std::string train_pos_path;
  SyntheticCorpusOptions synthetic;
  std::size_t train_documents = 400;
  std::size_t valid_documents = 40;
  std::size_t vocab_size = 8192;
  std::size_t min_freq = 1;
  std::size_t max_seq_len = 512;
  DocIdMode docid = DocIdMode::Control;
  /// Packs with max_seq_len - 3 so every arm of a docid experiment shares
  /// the same sequences.
  bool reserve_docid_prefix = false;

  json to_json() const;
  static DatasetConfig from_json(const json& j);
  std::size_t packing_budget() const;
};

struct ForgettingOptions {
  std::size_t inject_epoch = 0;  // 0 selects 20% of max_epochs
  std::size_t repetitions = 1;   // passes over the special batch per injection
  std::size_t period = 0;        // > 0: re-inject every `period` epochs
  bool interleaved = false;      // spread repetitions over consecutive epochs

  json to_json() const;
  static ForgettingOptions from_json(const json& j);
};

struct RunConfig {
  std::string run_id;  // empty: derived from the config hash
  std::string preset = "desk-tiny";
  std::size_t n_layers = 0;  // overrides; 0 keeps the preset value
  std::size_t n_heads = 0;
  std::size_t d_model = 0;
  std::size_t d_ffn = 0;
  Task task = Task::Causal;
  bool tie_embeddings = true;
  DatasetConfig dataset;
  std::uint64_t seed = 0;
  std::size_t max_epochs = 0;   // exactly one of max_epochs / max_updates
  std::size_t max_updates = 0;
  std::size_t batch_tokens = 0;  // 0: preset value
  double max_lr = 0.0;           // 0: preset value
  double warmup_fraction = LrSchedule::kDefaultWarmupFraction;
  std::size_t eval_every = 1;    // epochs between full evaluations
  std::size_t checkpoint_every = 0;
  std::vector<std::size_t> checkpoint_epochs;
  /// Ends the run once M(f) reaches this value (0 disables); records up to
  /// that point are unaffected.
  double early_exit_memorization = 0.0;
  std::uint64_t eval_mask_seed = 0x5eed;
  double mask_probability = 0.15;
  MaskStrategy mask_strategy = MaskStrategy::MaskOnly;
  bool allow_paper_scale = false;
  bool record_wall_time = false;
  bool log_updates = true;
  /// Experiment-specific fields.
  std::string experiment = "train";
  std::vector<double> taus = {0.4, 0.6, 0.8, 0.9};
  ForgettingOptions forgetting;

  /// Throws ConfigError on invalid or conflicting settings.
  void validate() const;
  const ModelPreset& base_preset() const;
  TransformerConfig model_config(std::size_t vocab_size) const;
  double resolved_max_lr(std::size_t param_count) const;
  std::size_t resolved_batch_tokens() const;

  json to_json() const;
  static RunConfig from_json(const json& j);
  /// Hash of the canonical JSON without run_id.
  std::string hash() const;
  std::string resolved_run_id() const;
};

// ---------------------------------------------------------------------------
// Data

struct PreparedData {
  Vocabulary vocab;
  std::vector<PackedSequence> train;
  std::vector<PackedSequence> valid;
  std::optional<PosLexicon> lexicon;
  std::size_t train_tokens = 0;

  /// Canonical JSON: sequences with source offsets, vocab hash, mask seed.
  json manifest(std::uint64_t eval_mask_seed) const;
};

/// Deterministic in the config. Throws IngestionError for unreadable or
/// misaligned inputs.
std::shared_ptr<const PreparedData> prepare_data(const DatasetConfig& config);

/// Splits sequences into update batches after a seeded shuffle; each batch
/// takes sequences until adding one more would exceed `batch_tokens`.
std::vector<std::vector<std::size_t>> plan_batches(std::span<const PackedSequence> sequences, std::size_t batch_tokens,
                                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training

struct RunResult {
  std::string run_id;
  std::filesystem::path dir;
  std::string config_hash;
  std::size_t param_count = 0;
  MemorizationHistory history;
  std::vector<json> records;  // metrics.jsonl, in order
  TrainingCounters counters;
  bool complete = false;

  /// Records of one kind, in log order.
  std::vector<json> of_kind(std::string_view kind) const;
};

/// Extra training on held-out sequences after selected epochs.
struct InjectionPlan {
  std::vector<std::size_t> after_epochs;  // ascending; injection follows that epoch's evaluation
  std::size_t passes = 1;
  std::vector<PackedSequence> special;
};

class Trainer {
 public:
  Trainer(RunConfig config, std::shared_ptr<const PreparedData> data, std::filesystem::path log_root);

  void set_injection(InjectionPlan plan);
  const RunConfig& config() const { return config_; }
  std::filesystem::path run_dir() const;

  /// Fresh run, or a continuation from `checkpoint`. A continuation keeps
  /// existing log lines up to the checkpoint and drops the rest.
  RunResult run(const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

 private:
  RunConfig config_;
  std::shared_ptr<const PreparedData> data_;
  std::filesystem::path log_root_;
  std::optional<InjectionPlan> injection_;
};

/// Reads a run directory back into a RunResult.
RunResult load_run(const std::filesystem::path& dir);

/// Reuses a complete run whose resolved config hash matches, otherwise trains.
RunResult run_or_load(const RunConfig& config, std::shared_ptr<const PreparedData> data,
                      const std::filesystem::path& log_root);

std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir, std::size_t epoch);

/// Log root from MEMLAB_LOG_ROOT, defaulting to ./runs.
std::filesystem::path default_log_root();

// ---------------------------------------------------------------------------
// Experiments

struct ScalingSweepResult {
  std::vector<std::string> presets;
  std::vector<double> taus;
  std::vector<RunResult> runs;                       // one per preset
  std::vector<std::vector<ThresholdCrossing>> table;  // [preset][tau]
};

ScalingSweepResult run_scaling_sweep(const RunConfig& base, std::span<const std::string> presets,
                                     std::span<const double> taus, const std::filesystem::path& log_root,
                                     const std::string& experiment_id);

struct LrSweepResult {
  std::vector<std::string> presets;
  std::vector<double> learning_rates;
  double tau = 0.9;
  std::vector<std::vector<RunResult>> runs;           // [preset][lr]
  std::vector<std::vector<ThresholdCrossing>> table;  // [preset][lr]
};

LrSweepResult run_lr_sweep(const RunConfig& base, std::span<const std::string> presets,
                           std::span<const double> learning_rates, double tau, const std::filesystem::path& log_root,
                           const std::string& experiment_id);

struct DocIdExperimentResult {
  std::vector<DocIdMode> arms;
  std::vector<RunResult> runs;
};

DocIdExperimentResult run_docid_experiment(const RunConfig& base, const std::filesystem::path& log_root,
                                           const std::string& experiment_id);

struct ForgettingCurve {
  std::vector<std::size_t> injections;  // epochs after which the special batch was trained on
  std::vector<std::size_t> epochs;      // epoch of each curve point
  std::vector<double> values;           // special-batch M(f), first point right after injection

  double baseline() const;
  std::vector<double> diff() const;
};

struct ForgettingResult {
  RunResult base;
  RunResult run;
  ForgettingCurve curve;
};

/// Trains (or reuses) the base run with a checkpoint at the injection epoch,
/// then resumes from it with the validation set as the special batch.
/// Throws UsageError if any validation sequence also occurs in training.
ForgettingResult run_forgetting(const RunConfig& base, const std::filesystem::path& log_root,
                                const std::string& experiment_id);

ForgettingCurve forgetting_curve(const RunResult& run);

struct ForgettingSweepResult {
  std::vector<std::string> presets;
  std::vector<ForgettingResult> results;
};

ForgettingSweepResult forgetting_baseline_vs_scale(const RunConfig& base, std::span<const std::string> presets,
                                                   const std::filesystem::path& log_root,
                                                   const std::string& experiment_id);

struct RepetitionArm {
  std::string label;  // "k=2", "period=3", ...
  ForgettingOptions options;
};

struct RepetitionExperimentResult {
  std::vector<RepetitionArm> arms;
  std::vector<ForgettingResult> results;
};

/// One forgetting run per arm, all resuming from the same base checkpoint.
RepetitionExperimentResult run_repetition_experiment(const RunConfig& base, std::span<const RepetitionArm> arms,
                                                     const std::filesystem::path& log_root,
                                                     const std::string& experiment_id);

/// 20% of the run, at least epoch 1.
std::size_t default_inject_epoch(std::size_t max_epochs);

/// Checkpoint epochs kept by forgetting base runs: 20%, 50% and 80% of
/// max_epochs (deduplicated, each at least 1 and before the last epoch).
std::vector<std::size_t> base_checkpoint_epochs(std::size_t max_epochs);

// ---------------------------------------------------------------------------
// Figures

inline const std::vector<std::string> kFigureFiles = {
    "fig1_t_vs_n.csv", "fig4_mem_before_overfit.csv", "fig7_lr.csv",   "fig8_docid.csv",     "fig9_pos.csv",
    "fig10_forgetting.csv", "fig12_repetition.csv", "fig16_diff.csv", "fig17_mul.csv"};

/// Writes the CSVs an experiment's manifest supports into
/// <log_root>/<experiment_id>/figures/ and returns their paths. Throws
/// IoError listing absent run ids.
std::vector<std::filesystem::path> emit_figure_data(const std::filesystem::path& log_root,
                                                    const std::string& experiment_id);

}  // namespace memlab
