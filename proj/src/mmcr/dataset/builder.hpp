// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mmcr/backends/interfaces.hpp"
#include "mmcr/dataset/synthetic.hpp"
#include "mmcr/dataset/types.hpp"

namespace mmcr {

struct SourceCounts {
  std::size_t images = 0;  // distinct images
  std::size_t qa_pairs = 0;

  bool operator==(const SourceCounts&) const = default;
};

struct SplitCounts {
  std::map<std::string, SourceCounts> per_source;  // keyed by source name
  SourceCounts total;                              // sums over sources

  bool operator==(const SplitCounts&) const = default;
};

struct DatasetManifest {
  static constexpr int kSchemaVersion = 1;
  SplitCounts train;
  SplitCounts dev;
  std::string template_table_version;
  std::uint64_t seed = 0;
  std::size_t skipped_generation_failures = 0;

  OrderedJson to_json() const;
};

// Counts per source; images are distinct image ids.
SplitCounts build_manifest(const std::vector<VQAPair>& pairs);

struct BuildConfig {
  fs::path kb_path;                 // optional
  fs::path vcr_path;                // optional
  fs::path out_dir;
  std::uint32_t resolution = 384;
  std::uint32_t steps = 50;
  std::uint64_t seed = 0;
  double dev_fraction = 0.1;
  int distractors = 2;
  std::optional<TemplateTable> templates;            // default_templates() if absent
  std::optional<std::set<std::string>> name_lexicon;  // default_name_lexicon() if absent
  std::vector<std::string> neutral_names;            // default_neutral_names() if empty
};

struct BuildReport {
  DatasetManifest manifest;
  std::size_t generator_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t unique_prompts = 0;
};

// Full pipeline: triples -> QA -> neutralized questions -> one image per
// distinct question; VCR records -> harmonized pairs. Writes train.jsonl,
// dev.jsonl, images/ and manifest.json under out_dir. Items are assigned to
// dev when hash(seed, image id) falls below dev_fraction, so a question and
// its image never straddle splits.
BuildReport build_dataset(const BuildConfig& cfg, const Backends& backends);

}  // namespace mmcr
