// SPDX-License-Identifier: Apache-2.0

#include "memlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "memlab/errors.hpp"
#include "memlab/hashing.hpp"

namespace memlab {
namespace {

constexpr char kMagic[8] = {'M', 'E', 'M', 'L', 'A', 'B', 'C', 'K'};

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void str(const std::string& s) { bytes(s.data(), s.size()); }
  std::size_t size() const { return buf_.size(); }
  const std::vector<std::uint8_t>& buffer() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(std::vector<std::uint8_t> data, std::string origin) : data_(std::move(data)), origin_(std::move(origin)) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    std::span<const std::uint8_t> s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::string str(std::size_t n) {
    auto b = bytes(n);
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw IoError(origin_ + ": truncated checkpoint");
  }
  std::vector<std::uint8_t> data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

void write_blob(ByteWriter& w, const std::string& name, const Shape& shape, std::span<const float> values) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.str(name);
  w.u32(static_cast<std::uint32_t>(shape.size()));
  for (auto e : shape) w.u64(e);
  w.u64(values.size());
  const std::size_t start = w.size();
  for (float f : values) w.u32(std::bit_cast<std::uint32_t>(f));
  const auto& buf = w.buffer();
  w.u64(fnv1a64(std::span(buf.data() + start, values.size() * 4)));
}

struct Blob {
  Shape shape;
  std::vector<float> values;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelState<float>& model, const AdamState<float>& adam,
                     const TrainingCounters& counters, const json& run_info) {
  const auto params = model.named_parameters();
  if (adam.first_moment.size() != params.size()) throw UsageError("adam state does not match model");

  json header = {{"format_version", kCheckpointFormatVersion},
                 {"config", to_json(model.config)},
                 {"seed", model.seed},
                 {"epoch", counters.epoch},
                 {"update", counters.update},
                 {"tokens_processed", counters.tokens_processed},
                 {"adam", {{"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}, {"step", adam.step}}},
                 {"run", run_info}};

  ByteWriter w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kCheckpointFormatVersion);
  const std::string header_text = canonical_json(header);
  w.u64(header_text.size());
  w.str(header_text);
  w.u32(static_cast<std::uint32_t>(params.size() * 3));
  for (const auto& [name, t] : params) write_blob(w, name, t.shape(), t.values());
  for (std::size_t i = 0; i < params.size(); ++i) {
    write_blob(w, "adam.m/" + params[i].first, params[i].second.shape(), adam.first_moment[i]);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    write_blob(w, "adam.v/" + params[i].first, params[i].second.shape(), adam.second_moment[i]);
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.size()));
    out.flush();
    if (!out) throw IoError("failed writing checkpoint " + tmp.string() + " (disk full?)");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(std::move(data), path.string());

  auto magic = r.bytes(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) throw IoError(path.string() + ": not a checkpoint");
  const auto version = r.u32();
  if (version != kCheckpointFormatVersion) {
    throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const json header = json::parse(r.str(r.u64()));

  std::map<std::string, Blob> blobs;
  const auto count = r.u32();
  for (std::uint32_t b = 0; b < count; ++b) {
    std::string name = r.str(r.u32());
    Blob blob;
    const auto rank = r.u32();
    for (std::uint32_t i = 0; i < rank; ++i) blob.shape.push_back(r.u64());
    const auto n = r.u64();
    auto raw = r.bytes(n * 4);
    const auto checksum = r.u64();
    if (fnv1a64(raw) != checksum) throw IoError(path.string() + ": checksum mismatch in blob '" + name + "'");
    blob.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(raw[i * 4 + k]) << (8 * k);
      blob.values[i] = std::bit_cast<float>(bits);
    }
    blobs.emplace(std::move(name), std::move(blob));
  }
  if (!r.done()) throw IoError(path.string() + ": trailing bytes after last blob");

  Checkpoint ck;
  ck.model = build_model<float>(transformer_config_from_json(header.at("config")), header.at("seed").get<std::uint64_t>());
  auto params = ck.model.named_parameters();
  auto take = [&](const std::string& name, const Shape& shape) -> std::vector<float>& {
    auto it = blobs.find(name);
    if (it == blobs.end()) throw IoError(path.string() + ": missing blob '" + name + "'");
    if (it->second.shape != shape) throw IoError(path.string() + ": shape mismatch for '" + name + "'");
    return it->second.values;
  };
  for (auto& [name, t] : params) {
    auto& v = take(name, t.shape());
    std::copy(v.begin(), v.end(), t.values().begin());
  }
  ck.adam = AdamState<float>::for_parameters(ck.model.parameters());
  const auto& a = header.at("adam");
  ck.adam.beta1 = a.at("beta1");
  ck.adam.beta2 = a.at("beta2");
  ck.adam.eps = a.at("eps");
  ck.adam.step = a.at("step");
  for (std::size_t i = 0; i < params.size(); ++i) {
    ck.adam.first_moment[i] = std::move(take("adam.m/" + params[i].first, params[i].second.shape()));
    ck.adam.second_moment[i] = std::move(take("adam.v/" + params[i].first, params[i].second.shape()));
  }
  ck.counters.epoch = header.at("epoch");
  ck.counters.update = header.at("update");
  ck.counters.tokens_processed = header.at("tokens_processed");
  ck.run_info = header.value("run", json::object());
  return ck;
}

}  // namespace memlab
