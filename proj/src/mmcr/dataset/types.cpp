// SPDX-License-Identifier: Apache-2.0
#include "mmcr/dataset/types.hpp"

#include <fmt/format.h>

#include <set>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"

namespace mmcr {

namespace {

bool is_hex_digest(const std::string& s) {
  return s.size() == 64 && s.find_first_not_of("0123456789abcdef") == std::string::npos;
}

}  // namespace

std::string to_string(TripleSource source) { return source == TripleSource::Base ? "base" : "conceptualized"; }

std::string to_string(QASource source) {
  switch (source) {
    case QASource::SyntheticKb: return "synthetic_kb";
    case QASource::Vcr: return "vcr";
    case QASource::Benchmark: return "benchmark";
  }
  return "unknown";
}

QASource parse_qa_source(const std::string& text) {
  if (text == "synthetic_kb") return QASource::SyntheticKb;
  if (text == "vcr") return QASource::Vcr;
  if (text == "benchmark") return QASource::Benchmark;
  fail(ErrorCode::SchemaError, "unknown source: " + text);
}

std::string VQAPair::rendered_question() const {
  if (caption_prefix && !caption_prefix->empty()) return *caption_prefix + " " + qa.question;
  return qa.question;
}

void validate(const QAPair& qa) {
  require(qa.choices.size() >= 2, ErrorCode::InvalidInput, "item " + qa.id + ": fewer than two choices");
  require(qa.answer_index >= 0 && static_cast<std::size_t>(qa.answer_index) < qa.choices.size(),
          ErrorCode::InvalidInput, fmt::format("item {}: answer_index {} out of range", qa.id, qa.answer_index));
  std::set<std::string> seen;
  for (const auto& c : qa.choices) {
    require(!c.empty(), ErrorCode::InvalidInput, "item " + qa.id + ": empty choice");
    require(seen.insert(c).second, ErrorCode::InvalidInput, "item " + qa.id + ": duplicate choice '" + c + "'");
  }
}

KnowledgeTriple triple_from_json(const Json& j) {
  require(j.is_object(), ErrorCode::SchemaError, "triple must be a JSON object");
  KnowledgeTriple t;
  for (const char* key : {"head", "relation", "tail"}) {
    require(j.contains(key) && j.at(key).is_string(), ErrorCode::SchemaError,
            std::string("triple field '") + key + "' missing or not a string");
  }
  t.head = j.at("head").get<std::string>();
  t.relation = j.at("relation").get<std::string>();
  t.tail = j.at("tail").get<std::string>();
  require(!t.head.empty() && !t.tail.empty(), ErrorCode::SchemaError, "triple head/tail must be non-empty");
  if (j.contains("source")) {
    const auto s = j.at("source").get<std::string>();
    if (s == "base") {
      t.source = TripleSource::Base;
    } else if (s == "conceptualized") {
      t.source = TripleSource::Conceptualized;
    } else {
      fail(ErrorCode::SchemaError, "triple source must be base or conceptualized, got " + s);
    }
  }
  return t;
}

std::string external_image_id(const fs::path& path) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec)) {
    const auto bytes = read_binary_file(path);
    return "vcr_" + sha256_hex(bytes).substr(0, 16);
  }
  return "vcr_" + sha256_hex(path.generic_string()).substr(0, 16);
}

OrderedJson pair_to_json(const VQAPair& pair, const fs::path& base_dir) {
  OrderedJson j;
  j["id"] = pair.qa.id;
  j["question"] = pair.qa.question;
  if (pair.caption_prefix) j["caption"] = *pair.caption_prefix;
  j["choices"] = pair.qa.choices;
  j["answer_index"] = pair.qa.answer_index;
  if (pair.image) {
    fs::path p(pair.image->path);
    if (!base_dir.empty() && p.is_absolute() == fs::path(base_dir).is_absolute()) {
      auto rel = p.lexically_relative(base_dir);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    j["image_path"] = p.generic_string();
  }
  j["source"] = to_string(pair.qa.source);
  return j;
}

VQAPair pair_from_json(const Json& j, const fs::path& base_dir) {
  require(j.is_object(), ErrorCode::SchemaError, "item must be a JSON object");
  VQAPair p;
  require(j.contains("question") && j.at("question").is_string(), ErrorCode::SchemaError,
          "item field 'question' missing or not a string");
  require(j.contains("choices") && j.at("choices").is_array(), ErrorCode::SchemaError,
          "item field 'choices' missing or not an array");
  require(j.contains("answer_index") && j.at("answer_index").is_number_integer(), ErrorCode::SchemaError,
          "item field 'answer_index' missing or not an integer");
  p.qa.id = j.value("id", std::string());
  p.qa.question = j.at("question").get<std::string>();
  for (const auto& c : j.at("choices")) {
    require(c.is_string(), ErrorCode::SchemaError, "choices must be strings");
    p.qa.choices.push_back(c.get<std::string>());
  }
  p.qa.answer_index = j.at("answer_index").get<int>();
  p.qa.source = j.contains("source") ? parse_qa_source(j.at("source").get<std::string>()) : QASource::Benchmark;
  try {
    validate(p.qa);
  } catch (const Error& e) {
    fail(ErrorCode::SchemaError, e.what());
  }
  if (j.contains("caption") && !j.at("caption").is_null()) p.caption_prefix = j.at("caption").get<std::string>();
  if (j.contains("image_path") && !j.at("image_path").is_null()) {
    fs::path path(j.at("image_path").get<std::string>());
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    path = path.lexically_normal();
    ImageRef ref;
    ref.path = path.string();
    const std::string stem = path.stem().string();
    if (is_hex_digest(stem)) {
      ref.prompt_hash = stem;
      ref.id = "img_" + stem.substr(0, 16);
    } else {
      ref.id = external_image_id(path);
    }
    p.image = std::move(ref);
  }
  return p;
}

void write_pairs(const fs::path& path, const std::vector<VQAPair>& pairs) {
  const fs::path base = path.parent_path();
  std::string out;
  for (const auto& p : pairs) out += pair_to_json(p, base).dump() + "\n";
  write_file_atomic(path, out);
}

std::vector<VQAPair> read_pairs(const fs::path& path) {
  std::vector<VQAPair> pairs;
  const fs::path base = path.parent_path();
  for_each_jsonl(path, [&](std::size_t lineno, const Json& j) {
    pairs.push_back(pair_from_json(j, base));
    if (pairs.back().qa.id.empty()) pairs.back().qa.id = fmt::format("line{}", lineno);
  });
  return pairs;
}

}  // namespace mmcr
