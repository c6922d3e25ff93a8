// SPDX-License-Identifier: Apache-2.0

#include <cstdint>

#include "memlab/errors.hpp"
#include "memlab/metrics.hpp"

namespace memlab {

std::vector<PosTag> tag_predictions(const ContextSet& contexts, std::span<const std::int32_t> predictions,
                                    const Vocabulary& vocab, const PosLexicon& lexicon) {
  if (predictions.size() != contexts.size()) throw UsageError("one prediction per context required");
  std::vector<PosTag> out(predictions.size(), PosTag::Other);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto id = predictions[i];
    if (vocab.is_reserved(id) || vocab.in_docid_region(id)) continue;
    out[i] = lexicon.tag(vocab.token(id), contexts.contexts[i].sentence_initial);
  }
  return out;
}

std::map<PosTag, PosRatio> pos_ratios(const ContextSet& contexts, std::span<const std::int32_t> predictions,
                                      std::span<const PosTag> predicted_tags) {
  if (predictions.size() != contexts.size() || predicted_tags.size() != contexts.size()) {
    throw UsageError("one prediction and one predicted tag per context required");
  }
  std::map<PosTag, PosRatio> out;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto& c = contexts.contexts[i];
    if (!c.tag) throw UsageError("context " + std::to_string(i) + " carries no POS tag");
    auto& r = out[*c.tag];
    ++r.count;
    const bool exact = predictions[i] == c.target;
    if (exact) ++r.exact;
    if (exact || predicted_tags[i] == *c.tag) ++r.same_tag;
  }
  for (auto& [tag, r] : out) {
    r.r = static_cast<double>(r.same_tag) / static_cast<double>(r.count);
    r.r_mem = static_cast<double>(r.exact) / static_cast<double>(r.count);
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> memorization_bitmaps(const ContextSet& contexts,
                                                           std::span<const std::int32_t> predictions) {
  if (predictions.size() != contexts.size()) throw UsageError("one prediction per context required");
  std::vector<std::vector<std::uint8_t>> maps;
  std::size_t current = SIZE_MAX;
  std::uint32_t last_position = 0;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto& c = contexts.contexts[i];
    if (c.sequence != current) {
      maps.emplace_back();
      current = c.sequence;
    } else if (c.position != last_position + 1) {
      maps.back().push_back(0);  // gap between scored positions breaks a run
    }
    last_position = c.position;
    maps.back().push_back(predictions[i] == c.target ? 1 : 0);
  }
  return maps;
}

MemoryUnitStats memory_unit_lengths(std::span<const std::vector<std::uint8_t>> bitmaps) {
  MemoryUnitStats st;
  std::size_t weighted = 0;
  for (const auto& bm : bitmaps) {
    std::size_t run = 0;
    auto close = [&] {
      if (run == 0) return;
      ++st.runs;
      ++st.histogram[run];
      st.memorized += run;
      weighted += run * run;
      run = 0;
    };
    for (auto b : bm) {
      if (b) {
        ++run;
      } else {
        close();
      }
    }
    close();
  }
  if (st.runs > 0) {
    st.mean_length = static_cast<double>(st.memorized) / static_cast<double>(st.runs);
    st.token_weighted_mean = static_cast<double>(weighted) / static_cast<double>(st.memorized);
  }
  return st;
}

}  // namespace memlab
