// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "batched.hpp"
#include "memlab/errors.hpp"

namespace memlab {

bool ContextSet::tagged() const {
  return !contexts.empty() &&
         std::all_of(contexts.begin(), contexts.end(), [](const Context& c) { return c.tag.has_value(); });
}

ContextSet extract_contexts(std::span<const PackedSequence> dataset, Task task, const ContextOptions& options) {
  if (dataset.empty()) throw UsageError("cannot extract contexts from an empty dataset");
  ContextSet set;
  set.task = task;
  set.inputs.reserve(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    const auto& seq = dataset[s];
    if (seq.ids.empty()) throw UsageError("empty sequence in dataset");
    const bool tagged = seq.tags.size() == seq.ids.size();
    auto push = [&](std::size_t p, std::int32_t target) {
      Context c;
      c.sequence = static_cast<std::uint32_t>(s);
      c.position = static_cast<std::uint32_t>(p);
      c.target = target;
      if (tagged) c.tag = seq.tags[p];
      c.sentence_initial = seq.sentence_initial(p);
      set.contexts.push_back(c);
    };
    if (task == Task::Causal) {
      set.inputs.push_back(seq.ids);
      for (std::size_t p = std::max<std::size_t>(1, seq.prefix_len); p < seq.ids.size(); ++p) push(p, seq.ids[p]);
    } else {
      PackedSequence plain = seq;
      plain.mask.reset();
      const auto masked = apply_mlm_mask(plain, options.eval_mask_seed, s, options.mask);
      set.inputs.push_back(masked.ids);
      for (std::size_t k = 0; k < masked.mask->positions.size(); ++k) {
        push(masked.mask->positions[k], masked.mask->originals[k]);
      }
    }
  }
  if (set.contexts.empty()) throw UsageError("dataset yields no contexts");
  return set;
}

std::int32_t argmax_lowest(std::span<const float> row) {
  if (row.empty()) throw UsageError("argmax of an empty row");
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return static_cast<std::int32_t>(best);
}

namespace detail {

void for_each_context_row(const ModelState<float>& model, const ContextSet& contexts, std::size_t batch_tokens,
                          const std::function<void(std::size_t, std::span<const float>)>& visit) {
  const std::size_t V = model.config.vocab_size;
  const bool causal = contexts.task == Task::Causal;
  // Contexts are sorted by sequence, so each sequence owns one contiguous range.
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // [first, last) per batch member
  std::vector<std::size_t> members;
  std::size_t longest = 0;

  auto flush = [&] {
    if (members.empty()) return;
    std::vector<std::span<const std::int32_t>> rows;
    for (auto s : members) rows.emplace_back(contexts.inputs[s]);
    const auto batch = TokenBatch::from_sequences(rows, Vocabulary::kPad);
    const auto logits = forward<float>(model, batch);
    const auto values = logits.values();
    for (std::size_t b = 0; b < members.size(); ++b) {
      for (std::size_t i = ranges[b].first; i < ranges[b].second; ++i) {
        const auto& c = contexts.contexts[i];
        const std::size_t row = b * batch.seq + (causal ? c.position - 1 : c.position);
        visit(i, values.subspan(row * V, V));
      }
    }
    members.clear();
    ranges.clear();
    longest = 0;
  };

  std::size_t i = 0;
  while (i < contexts.contexts.size()) {
    const std::size_t s = contexts.contexts[i].sequence;
    std::size_t j = i;
    while (j < contexts.contexts.size() && contexts.contexts[j].sequence == s) ++j;
    const std::size_t len = contexts.inputs.at(s).size();
    const std::size_t next_longest = std::max(longest, len);
    if (!members.empty() && next_longest * (members.size() + 1) > batch_tokens) flush();
    members.push_back(s);
    ranges.emplace_back(i, j);
    longest = std::max(longest, len);
    i = j;
  }
  flush();
}

}  // namespace detail

std::vector<std::int32_t> predict_contexts(const ModelState<float>& model, const ContextSet& contexts,
                                           std::size_t batch_tokens) {
  std::vector<std::int32_t> out(contexts.size(), -1);
  detail::for_each_context_row(model, contexts, batch_tokens,
                               [&](std::size_t i, std::span<const float> row) { out[i] = argmax_lowest(row); });
  return out;
}

}  // namespace memlab
