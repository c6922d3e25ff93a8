// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "memlab/jsonl.hpp"

namespace memlab {

// ---------------------------------------------------------------------------
// Part-of-speech tags

enum class PosTag : std::uint8_t { Noun, Propn, Num, Verb, Adj, Other };

inline constexpr std::array<PosTag, 6> kAllPosTags = {PosTag::Noun, PosTag::Propn, PosTag::Num,
                                                      PosTag::Verb, PosTag::Adj,   PosTag::Other};

std::string_view to_string(PosTag tag);
/// Universal labels (NOUN, PROPN, NUM, VERB, ADJ) plus their Penn Treebank
/// equivalents; anything else is OTHER.
PosTag pos_tag_from_label(std::string_view label);

// ---------------------------------------------------------------------------
// Tokenization

struct Token {
  std::string text;
  bool space_before = false;
};

/// Word-level split on whitespace and punctuation. Punctuation characters
/// are single tokens, except '.' and ',' between digits and '\'' or '-'
/// between letters/digits, which stay inside the word. Case is preserved.
std::vector<Token> tokenize(std::string_view text);
/// Inverse of tokenize() up to whitespace normalization.
std::string detokenize(std::span<const Token> tokens);
/// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

bool is_valid_utf8(std::string_view text);

struct Document {
  std::vector<std::string> tokens;
  /// Exclusive token offsets where sentences end; the last equals tokens.size().
  std::vector<std::size_t> sentence_ends;
  std::size_t source_offset = 0;  // byte offset of the block in the input text
  std::size_t token_offset = 0;   // offset of tokens[0] in the corpus token stream
  std::vector<PosTag> tags;       // empty, or one per token
};

struct Corpus {
  std::vector<Document> documents;
  std::size_t token_count() const;
  bool tagged() const;
};

/// One document per blank-line-separated block. A sentence ends at '.', '!'
/// or '?' followed by whitespace, and at the end of every document.
/// Throws IngestionError on invalid UTF-8 or when no tokens are present.
Corpus parse_corpus(std::string_view text);

/// Corpus-wide token stream, one token per line; the alignment target for
/// POS annotation files.
std::string export_token_stream(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kMask = 2;
  static constexpr std::int32_t kBos = 3;
  static constexpr std::size_t kNumReserved = 4;

  struct DocIdRegion {
    std::int32_t first = 0;
    std::size_t count = 0;
    bool operator==(const DocIdRegion&) const = default;
  };

  Vocabulary();

  std::size_t size() const { return tokens_.size(); }
  /// kUnk when absent.
  std::int32_t id(std::string_view token) const;
  std::optional<std::int32_t> find(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  bool is_reserved(std::int32_t id) const { return id >= 0 && id < static_cast<std::int32_t>(kNumReserved); }

  /// Appends an ordinary token (or returns its existing id).
  std::int32_t add(const std::string& token);

  const std::optional<DocIdRegion>& docid_region() const { return docid_; }
  bool in_docid_region(std::int32_t id) const;
  /// Appends `count` identifier tokens "<docid:i>". Throws UsageError if a
  /// region already exists.
  DocIdRegion add_docid_region(std::size_t count);

  std::vector<std::int32_t> encode(std::span<const std::string> tokens) const;

  std::uint64_t hash() const;
  json to_json() const;
  static Vocabulary from_json(const json& j);

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && docid_ == other.docid_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::optional<DocIdRegion> docid_;
};

/// Frequency-ranked word vocabulary: reserved ids first, then corpus words by
/// descending count (ties lexicographic), keeping words seen at least
/// `min_freq` times, truncated so size() <= max_size.
/// Throws IngestionError on an empty corpus.
Vocabulary build_vocab(const Corpus& corpus, std::size_t max_size, std::size_t min_freq = 1);

/// Fraction of corpus token occurrences that map to a non-unk id.
double vocab_coverage(const Vocabulary& vocab, const Corpus& corpus);

// ---------------------------------------------------------------------------
// Packed sequences and MLM layouts

enum class Corruption : std::uint8_t { Mask, Random, Keep };

struct MaskLayout {
  std::vector<std::uint32_t> positions;   // ascending
  std::vector<std::int32_t> originals;    // id before corruption
  std::vector<Corruption> corruption;

  bool operator==(const MaskLayout&) const = default;
};

struct PackedSequence {
  std::vector<std::int32_t> ids;
  std::size_t document = 0;
  /// Offset, in the corpus token stream, of the first non-prefix token.
  std::size_t source_token_offset = 0;
  /// Exclusive offsets into ids where sentences end.
  std::vector<std::size_t> sentence_ends;
  std::vector<PosTag> tags;     // empty, or one per id
  std::size_t prefix_len = 0;   // docid prefix tokens at the front
  bool truncated = false;       // a single over-long sentence was cut
  std::optional<MaskLayout> mask;

  std::size_t size() const { return ids.size(); }
  bool sentence_initial(std::size_t position) const;

  bool operator==(const PackedSequence&) const = default;
};

/// Greedy whole-sentence packing per document: a sentence joins the current
/// sequence if it fits in `max_len`, otherwise it starts a new one. A single
/// sentence longer than `max_len` is cut to `max_len` and flagged.
std::vector<PackedSequence> pack_sequences(const Corpus& corpus, const Vocabulary& vocab, std::size_t max_len = 512);

double mean_sequence_length(std::span<const PackedSequence> sequences);
std::size_t total_tokens(std::span<const PackedSequence> sequences);

enum class MaskStrategy { MaskOnly, Bert80_10_10 };

struct MaskOptions {
  double probability = 0.15;
  MaskStrategy strategy = MaskStrategy::MaskOnly;
  /// Exclusive upper bound for random replacement ids (Bert80_10_10 only).
  std::size_t vocab_size = 0;
};

/// Masks each non-special position independently with the configured
/// probability. The draw depends only on (seed, sequence_key).
/// Throws UsageError if the sequence already carries a layout.
PackedSequence apply_mlm_mask(const PackedSequence& seq, std::uint64_t seed, std::uint64_t sequence_key,
                              const MaskOptions& options = {});

// ---------------------------------------------------------------------------
// Unique document identifiers

enum class DocIdMode { Control, VocabOnly, Prepend };

std::string to_string(DocIdMode mode);
DocIdMode docid_mode_from_string(std::string_view name);

inline constexpr std::size_t kDocIdPrefixLength = 3;

struct DocIdDataset {
  std::vector<PackedSequence> sequences;
  Vocabulary vocab;
};

/// control: unchanged. vocab-only: adds one identifier token per sequence to
/// the vocabulary without using it. prepend: additionally prefixes each
/// sequence with "document ID <docid:i>".
/// Throws UsageError if the vocabulary already has a docid region or a
/// prefixed sequence would exceed `max_len`.
DocIdDataset prepend_doc_ids(std::span<const PackedSequence> sequences, const Vocabulary& vocab, DocIdMode mode,
                             std::size_t max_len = 512);

// ---------------------------------------------------------------------------
// POS annotations and the lexicon tagger

struct PosAnnotations {
  std::vector<std::string> tokens;
  std::vector<PosTag> tags;
};

/// Parses "token<TAB>TAG" lines. Throws IngestionError on malformed lines.
PosAnnotations parse_pos_annotations(std::string_view text);
std::string format_pos_annotations(const PosAnnotations& annotations);

/// Attaches tags to every corpus token. Alignment is verified by count and
/// checksum; on mismatch throws IngestionError naming the first differing
/// token offset.
void ingest_pos_annotations(Corpus& corpus, const PosAnnotations& annotations);

std::array<std::size_t, 6> tag_histogram(const Corpus& corpus);

bool is_number_token(std::string_view word);

/// Majority-tag lexicon with orthographic overrides: number patterns are NUM,
/// capitalized words outside sentence-initial position are PROPN, otherwise
/// the most frequent annotated tag (ties to the lower enum value), and
/// unseen words are OTHER.
class PosLexicon {
 public:
  static PosLexicon from_corpus(const Corpus& corpus);
  void add(const std::string& word, PosTag tag, std::size_t count = 1);
  PosTag tag(std::string_view word, bool sentence_initial = false) const;
  std::size_t size() const { return counts_.size(); }

 private:
  std::unordered_map<std::string, std::array<std::uint32_t, 6>> counts_;
};

// ---------------------------------------------------------------------------
// Synthetic WikiText-style corpus

/// Encyclopedic articles built from templates over Zipfian pseudo-word
/// lexicons. Each article has a unique title entity plus a few topical
/// nouns, names and numbers that recur inside it (bursty, as content words
/// are in natural text); verbs and adjectives are drawn afresh per slot.
struct SyntheticCorpusOptions {
  std::size_t nouns = 600;
  std::size_t proper_nouns = 400;
  std::size_t verbs = 300;
  std::size_t adjectives = 300;
  std::size_t min_sentences = 4;
  std::size_t max_sentences = 9;
  std::size_t topic_items = 4;
  double topic_reuse = 0.6;
  double zipf_exponent = 1.0;        // nouns and proper nouns
  double open_class_exponent = 0.5;  // verbs and adjectives
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  std::string text;         // blank-line separated documents
  std::string annotations;  // token<TAB>TAG per token, aligned with tokenize(text)
};

/// Renders documents [first, first + count) of the deterministic stream
/// defined by `options`; disjoint ranges share lexicons and so serve as
/// train/validation splits.
SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusOptions& options, std::size_t first,
                                          std::size_t count);

}  // namespace memlab
