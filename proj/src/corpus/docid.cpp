// SPDX-License-Identifier: Apache-2.0

#include "memlab/corpus.hpp"
#include "memlab/errors.hpp"

namespace memlab {

std::string to_string(DocIdMode mode) {
  switch (mode) {
    case DocIdMode::Control:
      return "control";
    case DocIdMode::VocabOnly:
      return "vocab-only";
    case DocIdMode::Prepend:
      return "prepend";
  }
  return "control";
}

DocIdMode docid_mode_from_string(std::string_view name) {
  if (name == "control") return DocIdMode::Control;
  if (name == "vocab-only") return DocIdMode::VocabOnly;
  if (name == "prepend") return DocIdMode::Prepend;
  throw ConfigError("unknown docid mode '" + std::string(name) + "' (control, vocab-only, prepend)");
}

DocIdDataset prepend_doc_ids(std::span<const PackedSequence> sequences, const Vocabulary& vocab, DocIdMode mode,
                             std::size_t max_len) {
  if (vocab.docid_region()) throw UsageError("vocabulary already has a document-id region");
  DocIdDataset out{{sequences.begin(), sequences.end()}, vocab};
  if (mode == DocIdMode::Control) return out;

  std::int32_t word_document = 0;
  std::int32_t word_id = 0;
  if (mode == DocIdMode::Prepend) {
    word_document = out.vocab.add("document");
    word_id = out.vocab.add("ID");
  }
  const auto region = out.vocab.add_docid_region(sequences.size());
  if (mode == DocIdMode::VocabOnly) return out;

  for (std::size_t i = 0; i < out.sequences.size(); ++i) {
    auto& s = out.sequences[i];
    if (s.prefix_len != 0 || s.mask) throw UsageError("sequence already prefixed or masked");
    if (s.ids.size() + kDocIdPrefixLength > max_len) {
      throw UsageError("sequence " + std::to_string(i) + " of length " + std::to_string(s.ids.size()) +
                       " exceeds max_len " + std::to_string(max_len) + " once prefixed; pack with a smaller budget");
    }
    const std::int32_t prefix[kDocIdPrefixLength] = {word_document, word_id,
                                                     region.first + static_cast<std::int32_t>(i)};
    s.ids.insert(s.ids.begin(), prefix, prefix + kDocIdPrefixLength);
    if (!s.tags.empty()) s.tags.insert(s.tags.begin(), kDocIdPrefixLength, PosTag::Other);
    for (auto& e : s.sentence_ends) e += kDocIdPrefixLength;
    s.prefix_len = kDocIdPrefixLength;
  }
  return out;
}

}  // namespace memlab
