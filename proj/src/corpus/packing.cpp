// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "memlab/corpus.hpp"
#include "memlab/errors.hpp"

namespace memlab {

bool PackedSequence::sentence_initial(std::size_t position) const {
  if (position == prefix_len) return true;
  return std::binary_search(sentence_ends.begin(), sentence_ends.end(), position);
}

std::vector<PackedSequence> pack_sequences(const Corpus& corpus, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len == 0) throw ConfigError("max sequence length must be positive");
  std::vector<PackedSequence> out;
  for (std::size_t di = 0; di < corpus.documents.size(); ++di) {
    const auto& doc = corpus.documents[di];
    const bool tagged = doc.tags.size() == doc.tokens.size();
    PackedSequence cur;
    auto start_new = [&](std::size_t token_start) {
      if (!cur.ids.empty()) out.push_back(std::move(cur));
      cur = PackedSequence{};
      cur.document = di;
      cur.source_token_offset = doc.token_offset + token_start;
    };
    start_new(0);
    std::size_t begin = 0;
    for (std::size_t end : doc.sentence_ends) {
      const std::size_t len = end - begin;
      if (!cur.ids.empty() && cur.ids.size() + len > max_len) start_new(begin);
      const std::size_t take = std::min(len, max_len);
      for (std::size_t i = begin; i < begin + take; ++i) {
        cur.ids.push_back(vocab.id(doc.tokens[i]));
        if (tagged) cur.tags.push_back(doc.tags[i]);
      }
      cur.sentence_ends.push_back(cur.ids.size());
      if (take < len) {
        cur.truncated = true;
        start_new(end);
      }
      begin = end;
    }
    if (!cur.ids.empty()) out.push_back(std::move(cur));
  }
  return out;
}

std::size_t total_tokens(std::span<const PackedSequence> sequences) {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.ids.size();
  return n;
}

double mean_sequence_length(std::span<const PackedSequence> sequences) {
  if (sequences.empty()) return 0.0;
  return static_cast<double>(total_tokens(sequences)) / static_cast<double>(sequences.size());
}

}  // namespace memlab
