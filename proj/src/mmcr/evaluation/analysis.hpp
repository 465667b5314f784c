// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mmcr/inference/inference.hpp"

namespace mmcr {

inline constexpr int kReportSchemaVersion = 1;

enum class FlipKind { Helpful, Harmful, Neutral };
std::string to_string(FlipKind kind);

struct FlipRecord {
  std::string id;
  int gold = 0;
  int text_only = 0;  // prediction at lambda = 0
  int ensembled = 0;  // prediction at the report's lambda
  FlipKind kind = FlipKind::Neutral;
};

// One benchmark's row of the helpful/harmful table. Percentages are over
// every evaluated item, not only the flipped ones.
struct AnalysisReport {
  std::string benchmark;
  double lambda = 0.0;
  double accuracy = 0.0;            // ensembled
  double text_only_accuracy = 0.0;  // lambda = 0
  double helpful_pct = 0.0;
  double harmful_pct = 0.0;
  std::size_t evaluated = 0;
  std::size_t helpful = 0;
  std::size_t harmful = 0;
  std::size_t neutral = 0;
  std::size_t excluded_count = 0;
  std::vector<FlipRecord> flips;  // every evaluated item, input order

  OrderedJson row_json() const;  // the table row without per-item flips
  OrderedJson to_json() const;
};

// Text-only (lambda = 0) versus ensembled prediction per item: wrong to right
// is helpful, right to wrong harmful, anything else neutral. Requires
// lambda > 0; items with incomplete scores are excluded and counted.
AnalysisReport helpful_harmful(const std::vector<ScoredItem>& items, double lambda,
                               TextChannel text_channel = TextChannel::LM, const std::string& benchmark = "");

// Scores the pairs first (images must be attached).
AnalysisReport helpful_harmful(const std::vector<VQAPair>& pairs, const AdapterState* adapters,
                               const Backends& backends, double lambda, const std::string& benchmark = "");

// {schema_version, lambda, rows[]}; the shape of a per-benchmark table.
OrderedJson helpful_harmful_table(const std::vector<AnalysisReport>& rows);

// 100 * max(0, cos(a, b)), in [0, 100] and symmetric.
double relevance(std::span<const double> a, std::span<const double> b);

// Relevance between a text and an image as seen by the scorer: the text's
// context vector against its attention-pooled image features.
double relevance_score(const std::string& text, const ImageRef& image, const Backends& backends,
                       const AdapterState* adapters = nullptr);

struct RelevanceReport {
  std::string dataset;
  double mean_relevance = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded_count = 0;
  std::vector<BackendDescriptor> scorer;  // text + vision descriptors used
  std::vector<std::pair<std::string, double>> items;

  OrderedJson to_json() const;
};

// Mean relevance of each pair's rendered question to its image.
RelevanceReport relevance_report(const std::vector<VQAPair>& pairs, const Backends& backends,
                                 const AdapterState* adapters = nullptr, const std::string& dataset = "");

struct ErasureResult {
  AttentionMap attention;      // gold-choice attention over the patch grid
  std::vector<std::size_t> erased;     // ascending patch index
  std::vector<std::size_t> surviving;  // ascending patch index
  fs::path image_path;         // masked PNG
  fs::path original_path;      // untouched PNG for comparison
  fs::path sidecar_path;       // JSON weight map

  OrderedJson to_json() const;
};

// Patch indices ordered by ascending attention weight, ties by index.
std::vector<std::size_t> erasure_order(const AttentionMap& attention);

// Attention of the gold choice over the pair's image; the `erase_count`
// lowest-weight patches are blacked out in a copy of the image (the stored
// original is never modified). Writes <id>_erased.png, <id>_original.png and
// <id>_attention.json under out_dir. InvalidInput unless erase_count < p.
ErasureResult attention_erasure(const VQAPair& pair, const AdapterState* adapters, const Backends& backends,
                                std::size_t erase_count, const fs::path& out_dir);

}  // namespace mmcr
