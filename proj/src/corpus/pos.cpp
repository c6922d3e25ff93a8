// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>

#include "memlab/corpus.hpp"
#include "memlab/errors.hpp"
#include "memlab/hashing.hpp"

namespace memlab {

std::string_view to_string(PosTag tag) {
  switch (tag) {
    case PosTag::Noun:
      return "NOUN";
    case PosTag::Propn:
      return "PROPN";
    case PosTag::Num:
      return "NUM";
    case PosTag::Verb:
      return "VERB";
    case PosTag::Adj:
      return "ADJ";
    case PosTag::Other:
      return "OTHER";
  }
  return "OTHER";
}

PosTag pos_tag_from_label(std::string_view label) {
  if (label == "NOUN" || label == "NN" || label == "NNS") return PosTag::Noun;
  if (label == "PROPN" || label == "NNP" || label == "NNPS") return PosTag::Propn;
  if (label == "NUM" || label == "CD") return PosTag::Num;
  if (label == "VERB" || (label.size() >= 2 && label.substr(0, 2) == "VB")) return PosTag::Verb;
  if (label == "ADJ" || (label.size() >= 2 && label.substr(0, 2) == "JJ")) return PosTag::Adj;
  return PosTag::Other;
}

PosAnnotations parse_pos_annotations(std::string_view text) {
  PosAnnotations out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size()) {
      throw IngestionError("annotation line " + std::to_string(line_no) + " is not 'token<TAB>TAG'");
    }
    out.tokens.emplace_back(line.substr(0, tab));
    out.tags.push_back(pos_tag_from_label(line.substr(tab + 1)));
  }
  return out;
}

std::string format_pos_annotations(const PosAnnotations& annotations) {
  std::string s;
  for (std::size_t i = 0; i < annotations.tokens.size(); ++i) {
    s += annotations.tokens[i];
    s.push_back('\t');
    s += to_string(annotations.tags[i]);
    s.push_back('\n');
  }
  return s;
}

void ingest_pos_annotations(Corpus& corpus, const PosAnnotations& annotations) {
  std::vector<const std::string*> stream;
  stream.reserve(corpus.token_count());
  std::uint64_t corpus_sum = kFnvOffset;
  for (const auto& d : corpus.documents) {
    for (const auto& t : d.tokens) {
      stream.push_back(&t);
      corpus_sum = fnv1a64(t, fnv1a64("\n", corpus_sum));
    }
  }
  std::uint64_t ann_sum = kFnvOffset;
  for (const auto& t : annotations.tokens) ann_sum = fnv1a64(t, fnv1a64("\n", ann_sum));

  if (stream.size() != annotations.tokens.size() || corpus_sum != ann_sum) {
    const std::size_t n = std::min(stream.size(), annotations.tokens.size());
    std::size_t k = 0;
    while (k < n && *stream[k] == annotations.tokens[k]) ++k;
    std::string detail = "annotation file misaligned with corpus at token offset " + std::to_string(k);
    if (k < n) {
      detail += " (corpus '" + *stream[k] + "', annotation '" + annotations.tokens[k] + "')";
    } else {
      detail += " (corpus has " + std::to_string(stream.size()) + " tokens, annotation " +
                std::to_string(annotations.tokens.size()) + ")";
    }
    throw IngestionError(detail);
  }
  std::size_t k = 0;
  for (auto& d : corpus.documents) {
    d.tags.assign(annotations.tags.begin() + static_cast<std::ptrdiff_t>(k),
                  annotations.tags.begin() + static_cast<std::ptrdiff_t>(k + d.tokens.size()));
    k += d.tokens.size();
  }
}

std::array<std::size_t, 6> tag_histogram(const Corpus& corpus) {
  std::array<std::size_t, 6> h{};
  for (const auto& d : corpus.documents) {
    for (auto t : d.tags) ++h[static_cast<std::size_t>(t)];
  }
  return h;
}

bool is_number_token(std::string_view word) {
  if (word.empty()) return false;
  bool digit = false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const char c = word[i];
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if ((c == '.' || c == ',') && i > 0 && i + 1 < word.size()) {
      continue;
    } else if ((c == '-' || c == '+') && i == 0) {
      continue;
    } else {
      return false;
    }
  }
  return digit;
}

PosLexicon PosLexicon::from_corpus(const Corpus& corpus) {
  if (!corpus.tagged()) throw UsageError("lexicon needs a POS-annotated corpus");
  PosLexicon lex;
  for (const auto& d : corpus.documents) {
    for (std::size_t i = 0; i < d.tokens.size(); ++i) lex.add(d.tokens[i], d.tags[i]);
  }
  return lex;
}

void PosLexicon::add(const std::string& word, PosTag tag, std::size_t count) {
  counts_[word][static_cast<std::size_t>(tag)] += static_cast<std::uint32_t>(count);
}

PosTag PosLexicon::tag(std::string_view word, bool sentence_initial) const {
  if (is_number_token(word)) return PosTag::Num;
  const bool capitalized = !word.empty() && std::isupper(static_cast<unsigned char>(word.front()));
  if (capitalized && !sentence_initial) return PosTag::Propn;
  auto it = counts_.find(std::string(word));
  if (it == counts_.end()) return PosTag::Other;
  const auto& c = it->second;
  return static_cast<PosTag>(std::max_element(c.begin(), c.end()) - c.begin());
}

}  // namespace memlab
