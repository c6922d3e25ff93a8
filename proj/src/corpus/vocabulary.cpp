// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>

#include "memlab/corpus.hpp"
#include "memlab/errors.hpp"
#include "memlab/hashing.hpp"

namespace memlab {
namespace {

constexpr const char* kReservedTokens[Vocabulary::kNumReserved] = {"<pad>", "<unk>", "<mask>", "<bos>"};

std::string docid_token(std::size_t i) { return "<docid:" + std::to_string(i) + ">"; }

}  // namespace

Vocabulary::Vocabulary() {
  for (const char* t : kReservedTokens) {
    index_.emplace(t, static_cast<std::int32_t>(tokens_.size()));
    tokens_.emplace_back(t);
  }
}

std::int32_t Vocabulary::id(std::string_view token) const { return find(token).value_or(kUnk); }

std::optional<std::int32_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw InputError("token id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::int32_t Vocabulary::add(const std::string& token) {
  if (auto existing = find(token)) return *existing;
  const auto id = static_cast<std::int32_t>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(token);
  return id;
}

bool Vocabulary::in_docid_region(std::int32_t id) const {
  return docid_ && id >= docid_->first && id < docid_->first + static_cast<std::int32_t>(docid_->count);
}

Vocabulary::DocIdRegion Vocabulary::add_docid_region(std::size_t count) {
  if (docid_) throw UsageError("vocabulary already has a document-id region");
  DocIdRegion region{static_cast<std::int32_t>(tokens_.size()), count};
  for (std::size_t i = 0; i < count; ++i) {
    const auto t = docid_token(i);
    if (index_.count(t)) throw UsageError("document-id token " + t + " already present in vocabulary");
    index_.emplace(t, static_cast<std::int32_t>(tokens_.size()));
    tokens_.push_back(t);
  }
  docid_ = region;
  return region;
}

std::vector<std::int32_t> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  if (docid_) {
    h = mix64(h ^ static_cast<std::uint64_t>(docid_->first));
    h = mix64(h ^ docid_->count);
  }
  return h;
}

json Vocabulary::to_json() const {
  json j = {{"tokens", tokens_}};
  if (docid_) j["docid_region"] = {{"first", docid_->first}, {"count", docid_->count}};
  return j;
}

Vocabulary Vocabulary::from_json(const json& j) {
  Vocabulary v;
  const auto tokens = j.at("tokens").get<std::vector<std::string>>();
  if (tokens.size() < kNumReserved) throw IngestionError("vocabulary file lacks reserved tokens");
  for (std::size_t i = 0; i < kNumReserved; ++i) {
    if (tokens[i] != kReservedTokens[i]) throw IngestionError("vocabulary file has unexpected reserved token " + tokens[i]);
  }
  v.tokens_.clear();
  v.index_.clear();
  for (const auto& t : tokens) {
    if (!v.index_.emplace(t, static_cast<std::int32_t>(v.tokens_.size())).second) {
      throw IngestionError("duplicate vocabulary token " + t);
    }
    v.tokens_.push_back(t);
  }
  if (j.contains("docid_region")) {
    v.docid_ = DocIdRegion{j["docid_region"].at("first").get<std::int32_t>(),
                           j["docid_region"].at("count").get<std::size_t>()};
  }
  return v;
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t max_size, std::size_t min_freq) {
  if (corpus.token_count() == 0) throw IngestionError("cannot build a vocabulary from an empty corpus");
  if (max_size < Vocabulary::kNumReserved) {
    throw ConfigError("vocabulary size must be at least " + std::to_string(Vocabulary::kNumReserved));
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& d : corpus.documents) {
    for (const auto& t : d.tokens) ++counts[t];
  }
  Vocabulary reserved;
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [t, c] : counts) {
    if (c >= min_freq && !reserved.find(t)) ranked.emplace_back(t, c);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (const auto& [t, c] : ranked) {
    if (v.size() >= max_size) break;
    v.add(t);
  }
  return v;
}

double vocab_coverage(const Vocabulary& vocab, const Corpus& corpus) {
  std::size_t known = 0;
  std::size_t total = 0;
  for (const auto& d : corpus.documents) {
    for (const auto& t : d.tokens) {
      ++total;
      if (vocab.find(t)) ++known;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(known) / static_cast<double>(total);
}

}  // namespace memlab
