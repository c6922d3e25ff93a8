// SPDX-License-Identifier: Apache-2.0

#include <cctype>

#include "memlab/corpus.hpp"
#include "memlab/errors.hpp"

namespace memlab {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_alnum_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_punct(char c) { return static_cast<unsigned char>(c) < 0x80 && std::ispunct(static_cast<unsigned char>(c)); }

/// Whether the punctuation byte at text[i] stays inside the surrounding word.
bool joins_word(std::string_view text, std::size_t i) {
  if (i == 0 || i + 1 >= text.size()) return false;
  const char prev = text[i - 1];
  const char next = text[i + 1];
  switch (text[i]) {
    case '.':
    case ',':
      return is_digit(prev) && is_digit(next);
    case '\'':
    case '-':
      return is_alnum_byte(prev) && is_alnum_byte(next);
    default:
      return false;
  }
}

bool is_sentence_final(std::string_view tok) { return tok == "." || tok == "!" || tok == "?"; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  bool space = false;
  std::string word;
  bool word_space = false;
  auto flush = [&] {
    if (!word.empty()) out.push_back({std::move(word), word_space});
    word.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (is_space(c)) {
      flush();
      space = true;
      continue;
    }
    if (is_punct(c) && !joins_word(text, i)) {
      flush();
      out.push_back({std::string(1, c), space});
      space = false;
      continue;
    }
    if (word.empty()) word_space = space;
    word.push_back(c);
    space = false;
  }
  flush();
  if (!out.empty()) out.front().space_before = false;
  return out;
}

std::string detokenize(std::span<const Token> tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && tokens[i].space_before) s.push_back(' ');
    s += tokens[i].text;
  }
  return s;
}

std::string normalize_whitespace(std::string_view text) {
  std::string s;
  bool pending = false;
  for (char c : text) {
    if (is_space(c)) {
      pending = !s.empty();
      continue;
    }
    if (pending) s.push_back(' ');
    pending = false;
    s.push_back(c);
  }
  return s;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > text.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.tokens.size();
  return n;
}

bool Corpus::tagged() const {
  for (const auto& d : documents) {
    if (d.tags.size() != d.tokens.size()) return false;
  }
  return !documents.empty();
}

Corpus parse_corpus(std::string_view text) {
  if (!is_valid_utf8(text)) {
    std::size_t bad = 0;
    while (bad < text.size() && is_valid_utf8(text.substr(0, bad + 1))) ++bad;
    throw IngestionError("corpus is not valid UTF-8 (near byte " + std::to_string(bad) + ")");
  }
  Corpus corpus;
  std::size_t token_offset = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    // A block runs until a line that contains only whitespace.
    std::size_t block_start = pos;
    std::size_t block_end = pos;
    bool any = false;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      const auto line = text.substr(pos, eol - pos);
      const bool blank = normalize_whitespace(line).empty();
      if (blank) {
        pos = eol + 1;
        if (any) break;
        block_start = pos;
        continue;
      }
      any = true;
      block_end = eol;
      pos = eol + 1;
    }
    if (!any) break;
    auto toks = tokenize(text.substr(block_start, block_end - block_start));
    if (toks.empty()) continue;
    Document doc;
    doc.source_offset = block_start;
    doc.token_offset = token_offset;
    doc.tokens.reserve(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) {
      doc.tokens.push_back(toks[i].text);
      const bool boundary = is_sentence_final(toks[i].text) && (i + 1 == toks.size() || toks[i + 1].space_before);
      if (boundary) doc.sentence_ends.push_back(i + 1);
    }
    if (doc.sentence_ends.empty() || doc.sentence_ends.back() != doc.tokens.size()) {
      doc.sentence_ends.push_back(doc.tokens.size());
    }
    token_offset += doc.tokens.size();
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty()) throw IngestionError("corpus contains no tokens");
  return corpus;
}

std::string export_token_stream(const Corpus& corpus) {
  std::string s;
  for (const auto& d : corpus.documents) {
    for (const auto& t : d.tokens) {
      s += t;
      s.push_back('\n');
    }
  }
  return s;
}

}  // namespace memlab
