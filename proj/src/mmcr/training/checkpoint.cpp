// SPDX-License-Identifier: Apache-2.0
#include "mmcr/training/checkpoint.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"

namespace mmcr {

namespace {

constexpr char kMagic[8] = {'M', 'M', 'C', 'R', 'C', 'K', 'P', 'T'};
enum Group : std::uint8_t { kLm = 0, kItm = 1, kBackbone = 2 };

template <typename T>
void put(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

void put_str(std::string& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string str() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= end_, ErrorCode::SchemaError, "checkpoint is truncated");
  }
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

void put_group(std::string& out, std::uint8_t group, const ParamSet& params) {
  for (const auto& [name, t] : params) {
    out.push_back(static_cast<char>(group));
    put_str(out, name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put<std::uint64_t>(out, d);
    for (double v : t.values) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
}

}  // namespace

std::string encode_checkpoint(const AdapterState& state, const Json& config) {
  state.validate();
  Json header;
  header["text_dim"] = state.text_dim;
  header["visual_dim"] = state.visual_dim;
  header["reduction_factor"] = state.reduction_factor;
  header["adapters_enabled"] = state.adapters_enabled;
  header["config"] = config;

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, Checkpoint::kVersion);
  put_str(out, header.dump());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.lm.size() + state.itm.size() + state.backbone.size()));
  put_group(out, kLm, state.lm);
  put_group(out, kItm, state.itm);
  put_group(out, kBackbone, state.backbone);
  put<std::uint64_t>(out, fnv1a64(out));
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  require(bytes.size() >= sizeof(kMagic) + 12 && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0,
          ErrorCode::SchemaError, "not an adapter checkpoint");
  const std::size_t body = bytes.size() - 8;
  Reader trailer(bytes, bytes.size());
  trailer.skip(body);
  require(trailer.get<std::uint64_t>() == fnv1a64(std::string_view(bytes).substr(0, body)), ErrorCode::SchemaError,
          "checkpoint checksum mismatch (file corrupted)");

  Reader in(bytes, body);
  in.skip(sizeof(kMagic));
  const auto version = in.get<std::uint32_t>();
  require(version == Checkpoint::kVersion, ErrorCode::SchemaError,
          fmt::format("unsupported checkpoint version {}", version));
  Json header;
  try {
    header = Json::parse(in.str());
  } catch (const Json::exception& e) {
    fail(ErrorCode::SchemaError, std::string("checkpoint header: ") + e.what());
  }
  Checkpoint ck;
  try {
    ck.state.text_dim = header.at("text_dim").get<std::size_t>();
    ck.state.visual_dim = header.at("visual_dim").get<std::size_t>();
    ck.state.reduction_factor = header.at("reduction_factor").get<int>();
    ck.state.adapters_enabled = header.at("adapters_enabled").get<bool>();
    ck.config = header.value("config", Json::object());
  } catch (const Json::exception& e) {
    fail(ErrorCode::SchemaError, std::string("checkpoint header: ") + e.what());
  }

  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto group = in.get<std::uint8_t>();
    const std::string name = in.str();
    Tensor t;
    const auto rank = in.get<std::uint32_t>();
    require(rank >= 1 && rank <= 2, ErrorCode::SchemaError, "checkpoint tensor rank must be 1 or 2: " + name);
    std::size_t size = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.shape.push_back(static_cast<std::size_t>(in.get<std::uint64_t>()));
      size *= t.shape.back();
    }
    require(size <= bytes.size() / 8, ErrorCode::SchemaError, "checkpoint tensor larger than the file: " + name);
    t.values.resize(size);
    for (auto& v : t.values) v = std::bit_cast<double>(in.get<std::uint64_t>());
    ParamSet* dst = group == kLm ? &ck.state.lm : group == kItm ? &ck.state.itm
                                              : group == kBackbone ? &ck.state.backbone
                                                                   : nullptr;
    require(dst != nullptr, ErrorCode::SchemaError, "checkpoint tensor has an unknown group: " + name);
    require(dst->emplace(name, std::move(t)).second, ErrorCode::SchemaError, "duplicate checkpoint tensor " + name);
  }
  require(in.done(), ErrorCode::SchemaError, "trailing bytes in checkpoint");
  try {
    ck.state.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DimensionError) throw;
    fail(ErrorCode::SchemaError, std::string("checkpoint content: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const fs::path& path, const AdapterState& state, const Json& config) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, encode_checkpoint(state, config));
}

Checkpoint load_checkpoint(const fs::path& path) { return decode_checkpoint(read_text_file(path)); }

void check_compatible(const AdapterState& state, const Backends& backends) {
  if (backends.text && backends.text->feature_dim() != state.text_dim) {
    fail(ErrorCode::DimensionError, fmt::format("adapters expect text dim {}, text scorer has {}", state.text_dim,
                                                backends.text->feature_dim()));
  }
  if (backends.vision && backends.vision->feature_dim() != state.visual_dim) {
    fail(ErrorCode::DimensionError, fmt::format("adapters expect visual dim {}, visual encoder has {}",
                                                state.visual_dim, backends.vision->feature_dim()));
  }
  if (!state.backbone.empty() && backends.text) {
    for (const auto& [name, t] : backends.text->frozen_parameters()) {
      auto it = state.backbone.find(name);
      require(it != state.backbone.end() && it->second.shape == t.shape, ErrorCode::DimensionError,
              "fine-tuned backbone does not match the text scorer at " + name);
    }
  }
}

}  // namespace mmcr
