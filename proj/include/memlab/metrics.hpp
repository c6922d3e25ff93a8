// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memlab/corpus.hpp"
#include "memlab/transformer.hpp"

namespace memlab {

// ---------------------------------------------------------------------------
// Contexts

/// One scored (input, target) pair. For the causal task the model sees
/// inputs[sequence][0, position) and must produce the token at `position`;
/// for the masked task it sees the whole corrupted sequence and must
/// restore the token at `position`.
struct Context {
  std::uint32_t sequence = 0;
  std::uint32_t position = 0;
  std::int32_t target = 0;
  std::optional<PosTag> tag;
  bool sentence_initial = false;
};

struct ContextSet {
  Task task = Task::Causal;
  std::vector<std::vector<std::int32_t>> inputs;  // model input per sequence
  std::vector<Context> contexts;                  // sorted by (sequence, position)

  std::size_t size() const { return contexts.size(); }
  bool tagged() const;
};

struct ContextOptions {
  std::uint64_t eval_mask_seed = 0;
  MaskOptions mask;
};

/// Causal: every position t >= max(1, prefix_len). Masked: positions
/// selected by the fixed evaluation layout for `eval_mask_seed`.
/// Throws UsageError on an empty dataset or when no context is produced.
ContextSet extract_contexts(std::span<const PackedSequence> dataset, Task task, const ContextOptions& options = {});

/// Argmax with ties resolved to the lowest index.
std::int32_t argmax_lowest(std::span<const float> row);

/// Greedy prediction for every context, batching sequences up to
/// `batch_tokens` padded tokens per forward pass.
std::vector<std::int32_t> predict_contexts(const ModelState<float>& model, const ContextSet& contexts,
                                           std::size_t batch_tokens = 4096);

// ---------------------------------------------------------------------------
// Memorization

std::size_t memorized_count(const ContextSet& contexts, std::span<const std::int32_t> predictions);
double exact_memorization(const ContextSet& contexts, std::span<const std::int32_t> predictions);
double exact_memorization(const ModelState<float>& model, const ContextSet& contexts);

/// Fraction of scored rows whose argmax equals the target. `logits` is
/// [rows, V]; rows with scored[r] == 0 are skipped. Throws UsageError when
/// nothing is scored.
double update_memorization(std::span<const float> logits, std::size_t vocab, std::span<const std::int32_t> targets,
                           std::span<const std::uint8_t> scored);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double memorization = 0.0;
  double validation_ppl = 0.0;
};

struct UpdateRecord {
  std::size_t update = 0;  // 1-based
  double memorization = 0.0;
};

struct MemorizationHistory {
  std::vector<EpochRecord> epochs;
  std::vector<UpdateRecord> updates;
  std::size_t param_count = 0;
  std::string config_hash;

  /// Throws UsageError unless indices strictly increase and M lies in [0, 1].
  void add_epoch(const EpochRecord& r);
  void add_update(const UpdateRecord& r);

  std::vector<double> epoch_memorization() const;
  std::vector<double> update_memorization() const;
  std::vector<double> validation_ppl() const;
};

struct ThresholdCrossing {
  double tau = 0.0;
  bool reached = false;
  std::size_t index = 0;   // 1-based; meaningful when reached
  std::size_t budget = 0;  // series length examined
  double value = 0.0;      // series value at the crossing
};

/// Smallest 1-based i with series[i-1] >= tau. Throws ConfigError for tau
/// outside (0, 1) and UsageError for an empty series.
ThresholdCrossing threshold_crossing(std::span<const double> series, double tau);

/// Trailing mean over `window` points; the first window-1 entries average
/// the available prefix.
std::vector<double> rolling_average(std::span<const double> series, std::size_t window = 5);

/// exp(mean negative log-likelihood) over scored contexts.
double perplexity(const ModelState<float>& model, const ContextSet& contexts, std::size_t batch_tokens = 4096);

/// Smallest 1-based epoch e >= 2 with ppl(e) > ppl(e-1). Throws UsageError
/// for fewer than two epochs.
std::optional<std::size_t> detect_overfit_epoch(std::span<const double> validation_ppl);

// ---------------------------------------------------------------------------
// POS breakdown

struct PosRatio {
  std::size_t count = 0;        // contexts with this gold tag
  std::size_t same_tag = 0;     // predictions carrying the gold tag
  std::size_t exact = 0;        // exact-token predictions
  double r = 0.0;               // same_tag / count
  double r_mem = 0.0;           // exact / count
};

/// Per-tag ratios over contexts with that gold tag; tags with no contexts
/// are omitted. An exact match always counts as a tag match.
std::map<PosTag, PosRatio> pos_ratios(const ContextSet& contexts, std::span<const std::int32_t> predictions,
                                      std::span<const PosTag> predicted_tags);

/// Tags predictions with the lexicon; a reserved or docid id is OTHER.
std::vector<PosTag> tag_predictions(const ContextSet& contexts, std::span<const std::int32_t> predictions,
                                    const Vocabulary& vocab, const PosLexicon& lexicon);

// ---------------------------------------------------------------------------
// Memory units

struct MemoryUnitStats {
  double mean_length = 0.0;            // mean over maximal memorized runs
  double token_weighted_mean = 0.0;    // run length seen by a memorized token
  std::size_t runs = 0;
  std::size_t memorized = 0;
  std::map<std::size_t, std::size_t> histogram;  // run length -> count
};

MemoryUnitStats memory_unit_lengths(std::span<const std::vector<std::uint8_t>> bitmaps);
/// Builds one bitmap per sequence from its contexts in position order.
std::vector<std::vector<std::uint8_t>> memorization_bitmaps(const ContextSet& contexts,
                                                           std::span<const std::int32_t> predictions);

// ---------------------------------------------------------------------------
// Rank statistics

/// Spearman correlation with average ranks for ties; NaN when either input
/// is constant. Throws UsageError for mismatched or short inputs.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace memlab
