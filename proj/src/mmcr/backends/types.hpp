// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mmcr {

enum class BackendKind { TextScorer, VisualEncoder, T2IGenerator, Captioner };
enum class ScoringMode { Masked, Autoregressive };

std::string to_string(BackendKind kind);
BackendKind parse_backend_kind(const std::string& text);
std::string to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(const std::string& text);

struct BackendDescriptor {
  BackendKind kind = BackendKind::TextScorer;
  std::string name = "stub";
  std::map<std::string, std::int64_t> config;

  std::int64_t get(const std::string& key, std::int64_t fallback) const;
  // Throws InvalidInput when feature_dim / resolution / grid values are not positive.
  void validate() const;
  // "kind=name:key=value,..." with keys in sorted order.
  std::string to_spec() const;
};

struct TextFeatures {
  std::vector<double> context_vector;   // d_t
  std::vector<double> token_log_probs;  // one per scored token, each <= 0
  ScoringMode scoring_mode = ScoringMode::Masked;
};

struct VisualFeatures {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t dim = 0;
  std::vector<double> patches;  // (rows*cols) x dim, row-major

  std::size_t patch_count() const noexcept { return rows * cols; }
  std::span<const double> patch(std::size_t i) const { return {patches.data() + i * dim, dim}; }
};

struct ImageRef {
  std::string id;
  std::string path;
  std::uint32_t resolution = 0;
  std::string generator;
  std::string prompt_hash;

  bool operator==(const ImageRef&) const = default;
};

}  // namespace mmcr
