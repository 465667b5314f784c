// SPDX-License-Identifier: Apache-2.0
#include "mmcr/backends/types.hpp"

#include <fmt/format.h>

#include "mmcr/common/error.hpp"

namespace mmcr {

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::TextScorer: return "text_scorer";
    case BackendKind::VisualEncoder: return "visual_encoder";
    case BackendKind::T2IGenerator: return "t2i_generator";
    case BackendKind::Captioner: return "captioner";
  }
  return "unknown";
}

BackendKind parse_backend_kind(const std::string& text) {
  if (text == "text_scorer") return BackendKind::TextScorer;
  if (text == "visual_encoder") return BackendKind::VisualEncoder;
  if (text == "t2i_generator") return BackendKind::T2IGenerator;
  if (text == "captioner") return BackendKind::Captioner;
  fail(ErrorCode::UsageError, "unknown backend kind: " + text);
}

std::string to_string(ScoringMode mode) {
  return mode == ScoringMode::Masked ? "masked" : "autoregressive";
}

ScoringMode parse_scoring_mode(const std::string& text) {
  if (text == "masked") return ScoringMode::Masked;
  if (text == "autoregressive") return ScoringMode::Autoregressive;
  fail(ErrorCode::UsageError, "unknown scoring mode: " + text);
}

std::int64_t BackendDescriptor::get(const std::string& key, std::int64_t fallback) const {
  auto it = config.find(key);
  return it == config.end() ? fallback : it->second;
}

void BackendDescriptor::validate() const {
  for (const char* key : {"feature_dim", "resolution", "grid_rows", "grid_cols", "raster", "inference_steps"}) {
    auto it = config.find(key);
    if (it != config.end() && it->second <= 0) {
      fail(ErrorCode::InvalidInput,
           fmt::format("{} backend '{}': {} must be > 0 (got {})", to_string(kind), name, key, it->second));
    }
  }
}

std::string BackendDescriptor::to_spec() const {
  std::string out = to_string(kind) + "=" + name;
  char sep = ':';
  for (const auto& [k, v] : config) {
    out += fmt::format("{}{}={}", sep, k, v);
    sep = ',';
  }
  return out;
}

}  // namespace mmcr
