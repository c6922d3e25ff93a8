// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "memlab/jsonl.hpp"
#include "memlab/optimizer.hpp"
#include "memlab/transformer.hpp"

namespace memlab {

struct TrainingCounters {
  std::uint64_t epoch = 0;             // completed epochs
  std::uint64_t update = 0;            // completed gradient updates
  std::uint64_t tokens_processed = 0;  // schedule position

  bool operator==(const TrainingCounters&) const = default;
};

struct Checkpoint {
  ModelState<float> model;
  AdamState<float> adam;
  TrainingCounters counters;
  json run_info;
};

/// Binary checkpoint layout (all integers little-endian):
///
///   "MEMLABCK" | u32 format version | u64 header length | canonical JSON header
///   u32 blob count
///   per blob: u32 name length | name | u32 rank | u64 extents[rank] |
///             u64 element count | f32 elements | u64 FNV-1a of element bytes
///
/// The header carries the model config, init seed, counters, Adam
/// hyperparameters and step, and caller-supplied run info. Blobs are the
/// model parameters in canonical order followed by "adam.m/<name>" and
/// "adam.v/<name>".
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ModelState<float>& model,
                     const AdamState<float>& adam, const TrainingCounters& counters,
                     const json& run_info = json::object());

/// Throws IoError on a bad magic, unsupported version, truncated file, or
/// checksum mismatch (naming the blob).
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace memlab
