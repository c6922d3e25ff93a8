// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>
#include <random>

#include "memlab/errors.hpp"
#include "memlab/harness.hpp"
#include "memlab/hashing.hpp"

namespace memlab {

std::shared_ptr<const PreparedData> prepare_data(const DatasetConfig& config) {
  Corpus train_corpus;
  Corpus valid_corpus;
  if (config.source == "synthetic") {
    const auto train = generate_synthetic_corpus(config.synthetic, 0, config.train_documents);
    const auto valid = generate_synthetic_corpus(config.synthetic, config.train_documents, config.valid_documents);
    train_corpus = parse_corpus(train.text);
    ingest_pos_annotations(train_corpus, parse_pos_annotations(train.annotations));
    valid_corpus = parse_corpus(valid.text);
    ingest_pos_annotations(valid_corpus, parse_pos_annotations(valid.annotations));
  } else if (config.source == "files") {
    try {
      train_corpus = parse_corpus(read_text_file(config.train_path));
      valid_corpus = parse_corpus(read_text_file(config.valid_path));
      if (!config.train_pos_path.empty()) {
        ingest_pos_annotations(train_corpus, parse_pos_annotations(read_text_file(config.train_pos_path)));
      }
    } catch (const IoError& e) {
      throw IngestionError(e.what());
    }
  } else {
    throw ConfigError("unknown dataset source '" + config.source + "'");
  }

  auto data = std::make_shared<PreparedData>();
  const Vocabulary base = build_vocab(train_corpus, config.vocab_size, config.min_freq);
  const std::size_t budget = config.packing_budget();
  const auto packed = pack_sequences(train_corpus, base, budget);
  auto arm = prepend_doc_ids(packed, base, config.docid, config.max_seq_len);
  data->vocab = std::move(arm.vocab);
  data->train = std::move(arm.sequences);
  data->valid = pack_sequences(valid_corpus, base, budget);
  if (train_corpus.tagged()) data->lexicon = PosLexicon::from_corpus(train_corpus);
  data->train_tokens = total_tokens(data->train);
  return data;
}

json PreparedData::manifest(std::uint64_t eval_mask_seed) const {
  auto describe = [](const std::vector<PackedSequence>& seqs) {
    json arr = json::array();
    for (const auto& s : seqs) {
      arr.push_back({{"document", s.document},
                     {"source_token_offset", s.source_token_offset},
                     {"length", s.ids.size()},
                     {"prefix_len", s.prefix_len},
                     {"truncated", s.truncated}});
    }
    return arr;
  };
  return {{"vocab_size", vocab.size()},
          {"vocab_hash", hex64(vocab.hash())},
          {"eval_mask_seed", eval_mask_seed},
          {"train_tokens", train_tokens},
          {"mean_train_length", mean_sequence_length(train)},
          {"train", describe(train)},
          {"valid", describe(valid)}};
}

std::vector<std::vector<std::size_t>> plan_batches(std::span<const PackedSequence> sequences, std::size_t batch_tokens,
                                                   std::uint64_t seed) {
  if (batch_tokens == 0) throw ConfigError("batch_tokens must be positive");
  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  std::size_t tokens = 0;
  for (auto i : order) {
    const auto n = sequences[i].ids.size();
    if (batches.empty() || tokens + n > batch_tokens) {
      batches.emplace_back();
      tokens = 0;
    }
    batches.back().push_back(i);
    tokens += n;
  }
  return batches;
}

}  // namespace memlab
