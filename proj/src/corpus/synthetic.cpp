// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>

#include "memlab/corpus.hpp"
#include "memlab/errors.hpp"
#include "memlab/hashing.hpp"

namespace memlab {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

// Slot markers: $E title entity, $P name, $N noun, $V verb, $A adjective,
// $Y year, $C count. Everything else is a literal function word.
constexpr const char* kOpening = "$E is a $A $N in the $N of $P .";
constexpr const char* kTemplates[] = {
    "$E $V the $A $N of $P in $Y .",
    "In $Y , $E $V a $N with $C $N .",
    "The $N of $E was $V by $P .",
    "It $V the $A $N and the $N .",
    "The $A $N $V $C $N near $P .",
    "During the $N , $P $V the $N of $E .",
    "$E has a $N of $C $N and a $A $N .",
    "The $N was $A , and it $V in $Y .",
    "According to $P , the $N $V the $A $N .",
    "By $Y , the $N of $E had $V $C $N .",
    "Its $N $V from $P to $P .",
    "$P $V that the $N of $E is $A .",
};

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

std::string syllable(std::size_t k) {
  std::string s;
  s.push_back(kConsonants[k / kVowels.size()]);
  s.push_back(kVowels[k % kVowels.size()]);
  return s;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

class Zipf {
 public:
  Zipf(std::size_t n, double exponent) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
      cdf_[r] = acc;
    }
    for (auto& c : cdf_) c /= acc;
  }
  std::size_t operator()(std::mt19937_64& rng) const {
    const double u = unit(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

struct Lexicon {
  std::vector<std::string> nouns, names, verbs, adjectives;
};

Lexicon build_lexicon(const SyntheticCorpusOptions& o) {
  std::mt19937_64 rng(seed_for(o.seed, 0x1e71c0));
  const std::size_t n_syll = kConsonants.size() * kVowels.size();
  std::set<std::string> used = {"the", "a", "of", "in", "is", "was", "by", "with", "and", "it", "has",
                                "had", "near", "during", "according", "to", "its", "from", "that"};
  auto stem = [&] {
    std::string s;
    const std::size_t k = 2 + uniform(rng, 2);
    for (std::size_t i = 0; i < k; ++i) s += syllable(uniform(rng, n_syll));
    return s;
  };
  auto fill = [&](std::vector<std::string>& out, std::size_t n, auto make) {
    while (out.size() < n) {
      std::string w = make();
      std::string key = w;
      key[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(key[0])));
      if (used.insert(key).second) out.push_back(std::move(w));
    }
  };
  static constexpr const char* kNounEnd[] = {"", "n", "t"};
  static constexpr const char* kNameEnd[] = {"", "s", "a"};
  static constexpr const char* kVerbEnd[] = {"ed", "es"};
  static constexpr const char* kAdjEnd[] = {"ic", "ous"};
  Lexicon lex;
  fill(lex.nouns, o.nouns, [&] { return stem() + kNounEnd[uniform(rng, 3)]; });
  fill(lex.names, o.proper_nouns, [&] { return capitalize(stem() + kNameEnd[uniform(rng, 3)]); });
  fill(lex.verbs, o.verbs, [&] { return stem() + kVerbEnd[uniform(rng, 2)]; });
  fill(lex.adjectives, o.adjectives, [&] { return stem() + kAdjEnd[uniform(rng, 2)]; });
  return lex;
}

/// Unique per document: the index in base-70 syllables plus a suffix no
/// lexicon word carries.
std::string entity_name(std::size_t index) {
  const std::size_t n_syll = kConsonants.size() * kVowels.size();
  std::string s;
  std::size_t v = index;
  for (int digits = 0; digits < 3 || v > 0; ++digits) {
    s += syllable(v % n_syll);
    v /= n_syll;
  }
  return capitalize(s + "ar");
}

std::string year(std::mt19937_64& rng) { return std::to_string(1800 + uniform(rng, 221)); }

std::string count(std::mt19937_64& rng) {
  if (unit(rng) < 0.2) return std::to_string(1 + uniform(rng, 99)) + "." + std::to_string(uniform(rng, 10));
  return std::to_string(2 + uniform(rng, 998));
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusOptions& o, std::size_t first, std::size_t count_docs) {
  if (o.nouns == 0 || o.proper_nouns == 0 || o.verbs == 0 || o.adjectives == 0) {
    throw ConfigError("synthetic lexicons must be non-empty");
  }
  if (o.min_sentences == 0 || o.max_sentences < o.min_sentences) throw ConfigError("bad sentence range");
  if (o.topic_items == 0 || !(o.topic_reuse >= 0.0 && o.topic_reuse <= 1.0)) {
    throw ConfigError("bad topic parameters");
  }
  const Lexicon lex = build_lexicon(o);
  const Zipf noun_z(lex.nouns.size(), o.zipf_exponent);
  const Zipf name_z(lex.names.size(), o.zipf_exponent);
  const Zipf verb_z(lex.verbs.size(), o.open_class_exponent);
  const Zipf adj_z(lex.adjectives.size(), o.open_class_exponent);
  constexpr std::size_t n_templates = std::size(kTemplates);

  SyntheticCorpus out;
  for (std::size_t d = first; d < first + count_docs; ++d) {
    std::mt19937_64 rng(seed_for(o.seed, 0xd0c, d));
    const std::string entity = entity_name(d);
    std::vector<std::string> topic_nouns, topic_names, topic_years, topic_counts;
    for (std::size_t i = 0; i < o.topic_items; ++i) {
      topic_nouns.push_back(lex.nouns[noun_z(rng)]);
      topic_names.push_back(lex.names[name_z(rng)]);
      topic_years.push_back(year(rng));
      topic_counts.push_back(count(rng));
    }
    auto pick = [&](const std::vector<std::string>& topic, auto fresh) {
      if (unit(rng) < o.topic_reuse) return topic[uniform(rng, topic.size())];
      return std::string(fresh());
    };
    const std::size_t sentences = o.min_sentences + uniform(rng, o.max_sentences - o.min_sentences + 1);
    std::string line;
    for (std::size_t s = 0; s < sentences; ++s) {
      const std::string_view tmpl = s == 0 ? kOpening : kTemplates[uniform(rng, n_templates)];
      std::size_t pos = 0;
      while (pos < tmpl.size()) {
        std::size_t end = tmpl.find(' ', pos);
        if (end == std::string_view::npos) end = tmpl.size();
        const auto piece = tmpl.substr(pos, end - pos);
        pos = end + 1;
        std::string word;
        PosTag tag = PosTag::Other;
        if (piece.size() == 2 && piece[0] == '$') {
          switch (piece[1]) {
            case 'E':
              word = entity;
              tag = PosTag::Propn;
              break;
            case 'P':
              word = pick(topic_names, [&] { return lex.names[name_z(rng)]; });
              tag = PosTag::Propn;
              break;
            case 'N':
              word = pick(topic_nouns, [&] { return lex.nouns[noun_z(rng)]; });
              tag = PosTag::Noun;
              break;
            case 'V':
              word = lex.verbs[verb_z(rng)];
              tag = PosTag::Verb;
              break;
            case 'A':
              word = lex.adjectives[adj_z(rng)];
              tag = PosTag::Adj;
              break;
            case 'Y':
              word = pick(topic_years, [&] { return year(rng); });
              tag = PosTag::Num;
              break;
            case 'C':
              word = pick(topic_counts, [&] { return count(rng); });
              tag = PosTag::Num;
              break;
            default:
              throw UsageError("bad template slot");
          }
        } else {
          word = std::string(piece);
        }
        if (!line.empty()) line.push_back(' ');
        line += word;
        out.annotations += word;
        out.annotations.push_back('\t');
        out.annotations += to_string(tag);
        out.annotations.push_back('\n');
      }
    }
    out.text += line;
    out.text += "\n\n";
  }
  return out;
}

}  // namespace memlab
