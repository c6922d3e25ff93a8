// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace memlab {

using json = nlohmann::json;

/// Canonical serialization: sorted keys, no whitespace.
std::string canonical_json(const json& value);

/// Append-only JSON-lines writer. Every record is written as one complete
/// line and flushed; a failed write throws IoError so the file never holds
/// a torn record beyond the last successful line.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path, bool truncate = false);
  void append(const json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::vector<json> read_jsonl(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace memlab
