// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "memlab/corpus.hpp"
#include "memlab/errors.hpp"
#include "memlab/hashing.hpp"

namespace memlab {
namespace {

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

PackedSequence apply_mlm_mask(const PackedSequence& seq, std::uint64_t seed, std::uint64_t sequence_key,
                              const MaskOptions& options) {
  if (seq.mask) throw UsageError("sequence already carries a mask layout");
  if (!(options.probability >= 0.0 && options.probability <= 1.0)) {
    throw ConfigError("mask probability must lie in [0, 1]");
  }
  const bool mix = options.strategy == MaskStrategy::Bert80_10_10;
  if (mix && options.vocab_size <= Vocabulary::kNumReserved) {
    throw ConfigError("80/10/10 masking needs the vocabulary size for random replacements");
  }
  std::mt19937_64 rng(seed_for(seed, sequence_key));
  PackedSequence out = seq;
  MaskLayout layout;
  for (std::size_t i = seq.prefix_len; i < seq.ids.size(); ++i) {
    const auto id = seq.ids[i];
    if (id < static_cast<std::int32_t>(Vocabulary::kNumReserved)) continue;
    if (unit(rng) >= options.probability) continue;
    layout.positions.push_back(static_cast<std::uint32_t>(i));
    layout.originals.push_back(id);
    Corruption c = Corruption::Mask;
    if (mix) {
      const double r = unit(rng);
      if (r >= 0.9) {
        c = Corruption::Keep;
      } else if (r >= 0.8) {
        c = Corruption::Random;
      }
    }
    layout.corruption.push_back(c);
    switch (c) {
      case Corruption::Mask:
        out.ids[i] = Vocabulary::kMask;
        break;
      case Corruption::Random: {
        const auto span = options.vocab_size - Vocabulary::kNumReserved;
        out.ids[i] = static_cast<std::int32_t>(Vocabulary::kNumReserved + rng() % span);
        break;
      }
      case Corruption::Keep:
        break;
    }
  }
  out.mask = std::move(layout);
  return out;
}

}  // namespace memlab
