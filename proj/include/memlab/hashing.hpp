// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace memlab {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// 64-bit FNV-1a, chainable through `seed`.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = kFnvOffset);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = kFnvOffset);

/// splitmix64 finalizer; derives independent RNG seeds from structured keys.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t seed_for(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

std::string hex64(std::uint64_t value);

}  // namespace memlab
