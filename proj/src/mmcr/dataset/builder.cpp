// SPDX-License-Identifier: Apache-2.0
#include "mmcr/dataset/builder.hpp"

#include <fmt/format.h>

#include <unordered_map>
#include <unordered_set>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/log.hpp"
#include "mmcr/dataset/image_store.hpp"
#include "mmcr/dataset/vcr.hpp"

namespace mmcr {

namespace {

OrderedJson counts_json(const SourceCounts& c) {
  OrderedJson j;
  j["images"] = c.images;
  j["qa_pairs"] = c.qa_pairs;
  return j;
}

OrderedJson split_json(const SplitCounts& s) {
  OrderedJson j;
  for (const auto& [name, c] : s.per_source) j[name] = counts_json(c);
  j["total"] = counts_json(s.total);
  return j;
}

bool in_dev(const std::string& key, std::uint64_t seed, double fraction) {
  const std::uint64_t h = combine(seed, fnv1a64(key));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < fraction;
}

}  // namespace

OrderedJson DatasetManifest::to_json() const {
  OrderedJson j;
  j["schema_version"] = kSchemaVersion;
  j["template_table_version"] = template_table_version;
  j["seed"] = seed;
  j["train"] = split_json(train);
  j["dev"] = split_json(dev);
  j["skipped_generation_failures"] = skipped_generation_failures;
  return j;
}

SplitCounts build_manifest(const std::vector<VQAPair>& pairs) {
  SplitCounts s;
  s.per_source[to_string(QASource::SyntheticKb)] = {};
  s.per_source[to_string(QASource::Vcr)] = {};
  std::map<std::string, std::set<std::string>> images;
  std::set<std::string> all_images;
  for (const auto& p : pairs) {
    const std::string src = to_string(p.qa.source);
    ++s.per_source[src].qa_pairs;
    ++s.total.qa_pairs;
    if (p.image) {
      images[src].insert(p.image->id);
      all_images.insert(p.image->id);
    }
  }
  for (auto& [src, c] : s.per_source) c.images = images[src].size();
  s.total.images = all_images.size();
  return s;
}

BuildReport build_dataset(const BuildConfig& cfg, const Backends& backends) {
  require(!cfg.kb_path.empty() || !cfg.vcr_path.empty(), ErrorCode::InvalidInput,
          "build-dataset needs --kb and/or --vcr");
  require(!cfg.out_dir.empty(), ErrorCode::InvalidInput, "build-dataset needs an output directory");
  require(cfg.dev_fraction >= 0.0 && cfg.dev_fraction <= 1.0, ErrorCode::InvalidInput,
          "dev fraction must lie in [0, 1]");
  require(cfg.resolution > 0 && cfg.steps > 0, ErrorCode::InvalidInput, "resolution and steps must be positive");
  require(cfg.distractors >= 1, ErrorCode::InvalidInput, "distractor count must be >= 1");

  const TemplateTable templates = cfg.templates.value_or(default_templates());
  const std::set<std::string> lexicon = cfg.name_lexicon.value_or(default_name_lexicon());
  const std::vector<std::string> neutral = cfg.neutral_names.empty() ? default_neutral_names() : cfg.neutral_names;

  BuildReport report;
  report.manifest.template_table_version = templates.version;
  report.manifest.seed = cfg.seed;
  std::vector<VQAPair> train, dev;

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) fail(ErrorCode::StorageError, "cannot create " + cfg.out_dir.string() + ": " + ec.message());

  if (!cfg.kb_path.empty()) {
    std::vector<KnowledgeTriple> triples;
    for_each_jsonl(cfg.kb_path, [&](std::size_t, const Json& j) {
      auto t = triple_from_json(j);
      templates.render(t.relation);
      triples.push_back(std::move(t));
    });
    std::vector<std::string> pool;
    std::unordered_set<std::string> seen_tails;
    for (const auto& t : triples) {
      if (seen_tails.insert(t.tail).second) pool.push_back(t.tail);
    }

    std::vector<QAPair> qas;
    std::unordered_map<std::string, int> id_uses;
    for (const auto& t : triples) {
      QAPair qa = triple_to_qa(t, pool, cfg.distractors, cfg.seed, templates);
      qa.question = neutralize_names(qa.question, lexicon);
      if (int n = id_uses[qa.id]++; n > 0) qa.id += fmt::format("_{}", n);
      qas.push_back(std::move(qa));
    }

    // One image per distinct neutralized question; every QA pair is kept and
    // shares the image of its question.
    ImageStore store(cfg.out_dir / "images", backends.generator);
    std::unordered_map<std::string, std::optional<ImageRef>> by_question;
    for (const auto& q : dedup_questions(qas)) {
      try {
        by_question[q.question] = store.get(q.question, cfg.resolution, cfg.steps);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::GenerationError) throw;
        log::get().warn("skipping question after generation failure: {}", e.what());
        by_question[q.question] = std::nullopt;
      }
    }
    report.unique_prompts = by_question.size();
    report.generator_calls = store.generator_calls();
    report.cache_hits = store.cache_hits();

    for (auto& qa : qas) {
      const auto& image = by_question.at(qa.question);
      if (!image) {
        ++report.manifest.skipped_generation_failures;
        continue;
      }
      VQAPair p{std::move(qa), *image, std::nullopt};
      (in_dev(p.image->id, cfg.seed, cfg.dev_fraction) ? dev : train).push_back(std::move(p));
    }
  }

  if (!cfg.vcr_path.empty()) {
    const fs::path base = cfg.vcr_path.parent_path();
    std::unordered_map<std::string, int> id_uses;
    for_each_jsonl(cfg.vcr_path, [&](std::size_t lineno, const Json& j) {
      VQAPair p = harmonize_vcr(j, neutral, cfg.seed, *backends.captioner, base, fmt::format("vcr-{}", lineno));
      if (int n = id_uses[p.qa.id]++; n > 0) p.qa.id += fmt::format("_{}", n);
      (in_dev(p.image->id, cfg.seed, cfg.dev_fraction) ? dev : train).push_back(std::move(p));
    });
  }

  write_pairs(cfg.out_dir / "train.jsonl", train);
  write_pairs(cfg.out_dir / "dev.jsonl", dev);
  report.manifest.train = build_manifest(train);
  report.manifest.dev = build_manifest(dev);
  write_file_atomic(cfg.out_dir / "manifest.json", pretty_json(report.manifest.to_json()));
  return report;
}

}  // namespace mmcr
