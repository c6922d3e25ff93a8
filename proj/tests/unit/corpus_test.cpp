// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "memlab/errors.hpp"
#include "memlab/corpus.hpp"

namespace memlab {
namespace {

std::vector<std::string> texts(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(s)) out.push_back(t.text);
  return out;
}

TEST(Tokenizer, SplitsPunctuationButKeepsNumbersAndContractions) {
  EXPECT_EQ(texts("Hello, world!"), (std::vector<std::string>{"Hello", ",", "world", "!"}));
  EXPECT_EQ(texts("It cost 1,234.50 in 1999."),
            (std::vector<std::string>{"It", "cost", "1,234.50", "in", "1999", "."}));
  EXPECT_EQ(texts("don't re-enter (now)"),
            (std::vector<std::string>{"don't", "re-enter", "(", "now", ")"}));
  EXPECT_EQ(texts("  \n\t "), std::vector<std::string>{});
}

TEST(Tokenizer, DetokenizeRoundTripsModuloWhitespace) {
  const std::string s = "The  cat (a tabby) sat.\nIt's 3.5 kg, roughly!";
  EXPECT_EQ(detokenize(tokenize(s)), normalize_whitespace(s));
}

TEST(Tokenizer, Utf8Validation) {
  EXPECT_TRUE(is_valid_utf8("caf\xc3\xa9"));
  EXPECT_FALSE(is_valid_utf8("bad \xc3"));
  EXPECT_FALSE(is_valid_utf8("\xff"));
}

TEST(Corpus, DocumentsAndSentences) {
  const auto c = parse_corpus("A b. C d!\n\nE f? G\n\n\n");
  ASSERT_EQ(c.documents.size(), 2u);
  EXPECT_EQ(c.documents[0].tokens.size(), 6u);
  EXPECT_EQ(c.documents[0].sentence_ends, (std::vector<std::size_t>{3, 6}));
  EXPECT_EQ(c.documents[1].sentence_ends, (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(c.documents[1].token_offset, 6u);
  EXPECT_EQ(c.token_count(), 10u);
}

TEST(Corpus, IngestionErrors) {
  EXPECT_THROW(parse_corpus(""), IngestionError);
  EXPECT_THROW(parse_corpus("\n\n  \n"), IngestionError);
  try {
    parse_corpus("ok text \xc3(");
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("8"), std::string::npos);
  }
}

TEST(Vocabulary, FrequencyOrderAndReservedIds) {
  const auto c = parse_corpus("b a b c b a");
  const auto v = build_vocab(c, 100);
  EXPECT_EQ(v.size(), 7u);
  EXPECT_EQ(v.token(Vocabulary::kPad), "<pad>");
  EXPECT_EQ(v.token(Vocabulary::kMask), "<mask>");
  EXPECT_EQ(v.id("b"), 4);
  EXPECT_EQ(v.id("a"), 5);
  EXPECT_EQ(v.id("c"), 6);
  EXPECT_EQ(v.id("zzz"), Vocabulary::kUnk);

  const auto capped = build_vocab(c, 5);
  EXPECT_EQ(capped.size(), 5u);
  EXPECT_EQ(capped.id("a"), Vocabulary::kUnk);
  EXPECT_NEAR(vocab_coverage(capped, c), 0.5, 1e-12);
  EXPECT_EQ(build_vocab(c, 100, 2).size(), 6u);
}

TEST(Vocabulary, JsonRoundTripAndHash) {
  auto v = build_vocab(parse_corpus("x y z x"), 100);
  v.add_docid_region(3);
  const auto back = Vocabulary::from_json(v.to_json());
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.hash(), v.hash());
  EXPECT_TRUE(v.in_docid_region(v.id("<docid:2>")));
  EXPECT_THROW(v.add_docid_region(1), UsageError);
}

TEST(Packing, WholeSentencesAndTruncation) {
  const auto c = parse_corpus("a b c. d e. f g h i j k.\n\nl m.");
  const auto v = build_vocab(c, 100);
  const auto seqs = pack_sequences(c, v, 5);
  ASSERT_EQ(seqs.size(), 4u);
  EXPECT_EQ(seqs[0].ids.size(), 4u);  // "a b c ."
  EXPECT_EQ(seqs[1].ids.size(), 3u);  // "d e ."
  EXPECT_EQ(seqs[2].ids.size(), 5u);  // cut
  EXPECT_TRUE(seqs[2].truncated);
  EXPECT_EQ(seqs[3].document, 1u);
  EXPECT_EQ(seqs[1].source_token_offset, 4u);
  EXPECT_TRUE(seqs[0].sentence_initial(0));
  EXPECT_FALSE(seqs[0].sentence_initial(1));
  for (const auto& s : seqs) EXPECT_LE(s.size(), 5u);
  EXPECT_EQ(total_tokens(seqs), 15u);
}

TEST(Masking, DeterministicAndWithinEligiblePositions) {
  const auto c = parse_corpus("one two three four five six seven eight nine ten eleven twelve .");
  const auto v = build_vocab(c, 100);
  auto seq = pack_sequences(c, v, 64)[0];
  const MaskOptions opts{0.5, MaskStrategy::MaskOnly, v.size()};
  const auto a = apply_mlm_mask(seq, 1, 0, opts);
  const auto b = apply_mlm_mask(seq, 1, 0, opts);
  const auto d = apply_mlm_mask(seq, 1, 1, opts);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.mask, d.mask);
  for (std::size_t i = 0; i < a.mask->positions.size(); ++i) {
    const auto p = a.mask->positions[i];
    EXPECT_EQ(a.ids[p], Vocabulary::kMask);
    EXPECT_EQ(a.mask->originals[i], seq.ids[p]);
  }
  EXPECT_THROW(apply_mlm_mask(a, 1, 0, opts), UsageError);
}

TEST(Masking, RateAndBertSplitOverManyPositions) {
  PackedSequence seq;
  seq.ids.assign(512, 10);
  std::size_t total = 0, masked = 0, mask_tok = 0, random = 0, keep = 0;
  const MaskOptions opts{0.15, MaskStrategy::Bert80_10_10, 100};
  for (std::uint64_t k = 0; k < 400; ++k) {
    const auto m = apply_mlm_mask(seq, 3, k, opts);
    total += seq.ids.size();
    masked += m.mask->positions.size();
    for (auto cor : m.mask->corruption) {
      mask_tok += cor == Corruption::Mask;
      random += cor == Corruption::Random;
      keep += cor == Corruption::Keep;
    }
  }
  const double rate = static_cast<double>(masked) / static_cast<double>(total);
  EXPECT_NEAR(rate, 0.15, 0.003);
  EXPECT_NEAR(static_cast<double>(mask_tok) / masked, 0.8, 0.01);
  EXPECT_NEAR(static_cast<double>(random) / masked, 0.1, 0.01);
  EXPECT_NEAR(static_cast<double>(keep) / masked, 0.1, 0.01);
}

TEST(DocIds, ArmsShareSequencesAndPrefixIsExcluded) {
  const auto c = parse_corpus("a b c.\n\nd e f.");
  const auto v = build_vocab(c, 100);
  const auto seqs = pack_sequences(c, v, 8);
  const auto control = prepend_doc_ids(seqs, v, DocIdMode::Control, 8);
  const auto vocab_only = prepend_doc_ids(seqs, v, DocIdMode::VocabOnly, 8);
  const auto prepend = prepend_doc_ids(seqs, v, DocIdMode::Prepend, 8);
  EXPECT_EQ(control.sequences, seqs);
  EXPECT_EQ(vocab_only.sequences, seqs);
  EXPECT_EQ(vocab_only.vocab.size(), v.size() + 2);
  ASSERT_EQ(prepend.sequences.size(), 2u);
  const auto& p = prepend.sequences[1];
  EXPECT_EQ(p.prefix_len, kDocIdPrefixLength);
  EXPECT_EQ(prepend.vocab.token(p.ids[0]), "document");
  EXPECT_EQ(prepend.vocab.token(p.ids[1]), "ID");
  EXPECT_EQ(prepend.vocab.token(p.ids[2]), "<docid:1>");
  EXPECT_EQ(std::vector<std::int32_t>(p.ids.begin() + 3, p.ids.end()), seqs[1].ids);
  EXPECT_THROW(prepend_doc_ids(seqs, v, DocIdMode::Prepend, 5), UsageError);
  EXPECT_EQ(docid_mode_from_string("vocab-only"), DocIdMode::VocabOnly);
  EXPECT_THROW(docid_mode_from_string("x"), ConfigError);
}

TEST(Pos, AnnotationAlignment) {
  auto c = parse_corpus("Alice saw 3 red cats .");
  const auto ann = parse_pos_annotations("Alice\tPROPN\nsaw\tVBD\n3\tCD\nred\tADJ\ncats\tNOUN\n.\tPUNCT\n");
  ingest_pos_annotations(c, ann);
  EXPECT_EQ(c.documents[0].tags,
            (std::vector<PosTag>{PosTag::Propn, PosTag::Verb, PosTag::Num, PosTag::Adj, PosTag::Noun, PosTag::Other}));
  EXPECT_EQ(parse_pos_annotations(format_pos_annotations(ann)).tags, ann.tags);

  auto c2 = parse_corpus("Alice saw 3 red dogs .");
  try {
    ingest_pos_annotations(c2, ann);
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
  }
  EXPECT_THROW(parse_pos_annotations("no tab here\n"), IngestionError);
}

TEST(Pos, LexiconRules) {
  PosLexicon lex;
  lex.add("run", PosTag::Verb, 3);
  lex.add("run", PosTag::Noun, 1);
  lex.add("Paris", PosTag::Propn);
  EXPECT_EQ(lex.tag("run"), PosTag::Verb);
  EXPECT_EQ(lex.tag("1,200"), PosTag::Num);
  EXPECT_EQ(lex.tag("Zorblax"), PosTag::Propn);
  EXPECT_EQ(lex.tag("Zorblax", true), PosTag::Other);
  EXPECT_EQ(lex.tag("unseen"), PosTag::Other);
  EXPECT_TRUE(is_number_token("1999"));
  EXPECT_FALSE(is_number_token("a1"));
}

TEST(Synthetic, DeterministicTaggedAndSplitsDisjoint) {
  SyntheticCorpusOptions o;
  const auto a = generate_synthetic_corpus(o, 0, 20);
  const auto b = generate_synthetic_corpus(o, 0, 20);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.annotations, b.annotations);
  auto corpus = parse_corpus(a.text);
  EXPECT_EQ(corpus.documents.size(), 20u);
  ingest_pos_annotations(corpus, parse_pos_annotations(a.annotations));
  const auto hist = tag_histogram(corpus);
  for (std::size_t t = 0; t < hist.size(); ++t) EXPECT_GT(hist[t], 0u) << t;

  const auto v = generate_synthetic_corpus(o, 20, 5);
  std::set<std::string> train_docs;
  for (const auto& d : corpus.documents) train_docs.insert(detokenize(tokenize(d.tokens.front())));
  const auto held = parse_corpus(v.text);
  for (const auto& d : held.documents) {
    EXPECT_FALSE(train_docs.count(d.tokens.front())) << d.tokens.front();
  }
}

}  // namespace
}  // namespace memlab
