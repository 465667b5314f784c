// SPDX-License-Identifier: Apache-2.0
#include "mmcr/dataset/vcr.hpp"

#include <fmt/format.h>

#include <regex>
#include <set>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/rng.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

namespace {

std::string join_names(const std::vector<long>& indices, const std::vector<std::string>& names,
                       long person_count) {
  require(!indices.empty(), ErrorCode::SchemaError, "empty person reference");
  std::vector<std::string> parts;
  for (long i : indices) {
    require(i >= 0, ErrorCode::SchemaError, fmt::format("negative person index {}", i));
    require(person_count < 0 || i < person_count, ErrorCode::SchemaError,
            fmt::format("person index {} has no box ({} boxes)", i, person_count));
    parts.push_back(names[static_cast<std::size_t>(i) % names.size()]);
  }
  std::string out = parts[0];
  for (std::size_t k = 1; k < parts.size(); ++k) out += (k + 1 == parts.size() ? " and " : ", ") + parts[k];
  return out;
}

std::string substitute_brackets(const std::string& text, const std::vector<std::string>& names,
                                long person_count) {
  static const std::regex kRef(R"(\[\s*(\d+(?:\s*,\s*\d+)*)\s*\])");
  std::string out;
  auto begin = std::sregex_iterator(text.begin(), text.end(), kRef);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(text, last, static_cast<std::size_t>(m.position(0)) - last);
    std::vector<long> idx;
    static const std::regex kNum(R"(\d+)");
    const std::string inner = m.str(1);
    for (auto n = std::sregex_iterator(inner.begin(), inner.end(), kNum); n != std::sregex_iterator(); ++n) {
      idx.push_back(std::stol(n->str()));
    }
    out += join_names(idx, names, person_count);
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(text, last, std::string::npos);
  return out;
}

}  // namespace

std::vector<std::string> default_neutral_names() {
  return {"Jordan", "Taylor", "Casey", "Riley", "Morgan", "Avery", "Quinn", "Jamie", "Skyler", "Rowan"};
}

std::string render_vcr_text(const Json& tokens_or_text, const std::vector<std::string>& names,
                            long person_count) {
  require(!names.empty(), ErrorCode::InvalidInput, "neutral name list is empty");
  if (tokens_or_text.is_string()) {
    return trim(substitute_brackets(tokens_or_text.get<std::string>(), names, person_count));
  }
  require(tokens_or_text.is_array(), ErrorCode::SchemaError, "text must be a string or a token array");
  std::vector<std::string> words;
  for (const auto& tok : tokens_or_text) {
    if (tok.is_string()) {
      words.push_back(substitute_brackets(tok.get<std::string>(), names, person_count));
    } else if (tok.is_array()) {
      std::vector<long> idx;
      for (const auto& v : tok) {
        require(v.is_number_integer(), ErrorCode::SchemaError, "person reference must hold integers");
        idx.push_back(v.get<long>());
      }
      words.push_back(join_names(idx, names, person_count));
    } else if (tok.is_number_integer()) {
      words.push_back(join_names({tok.get<long>()}, names, person_count));
    } else {
      fail(ErrorCode::SchemaError, "unsupported token in visual-QA text");
    }
  }
  return detokenize(words);
}

VQAPair harmonize_vcr(const Json& record, const std::vector<std::string>& neutral_names, std::uint64_t seed,
                      const Captioner& captioner, const fs::path& base_dir, const std::string& fallback_id) {
  require(record.is_object(), ErrorCode::SchemaError, "visual-QA record must be a JSON object");
  const Json* question = nullptr;
  if (record.contains("question_tokens")) {
    question = &record.at("question_tokens");
  } else if (record.contains("question")) {
    question = &record.at("question");
  }
  require(question != nullptr, ErrorCode::SchemaError, "record has neither question_tokens nor question");
  require(record.contains("choices") && record.at("choices").is_array() && record.at("choices").size() == 4,
          ErrorCode::SchemaError, "record must have exactly 4 choices");
  require(record.contains("answer_index") && record.at("answer_index").is_number_integer(), ErrorCode::SchemaError,
          "record answer_index missing or not an integer");
  const int gold = record.at("answer_index").get<int>();
  require(gold >= 0 && gold < 4, ErrorCode::SchemaError, fmt::format("answer_index {} out of range", gold));
  require(record.contains("image_path") && record.at("image_path").is_string(), ErrorCode::SchemaError,
          "record image_path missing");

  long person_count = -1;
  if (record.contains("person_boxes") && !record.at("person_boxes").is_null()) {
    require(record.at("person_boxes").is_array(), ErrorCode::SchemaError, "person_boxes must be an array");
    person_count = static_cast<long>(record.at("person_boxes").size());
  }

  VQAPair out;
  out.qa.id = record.contains("id") ? (record.at("id").is_string() ? record.at("id").get<std::string>()
                                                                   : record.at("id").dump())
                                    : fallback_id;
  out.qa.source = QASource::Vcr;
  out.qa.question = render_vcr_text(*question, neutral_names, person_count);
  require(!out.qa.question.empty(), ErrorCode::SchemaError, "record question is empty");

  std::vector<std::string> choices;
  for (const auto& c : record.at("choices")) choices.push_back(render_vcr_text(c, neutral_names, person_count));
  std::set<std::string> distinct(choices.begin(), choices.end());
  require(distinct.size() == 4 && !distinct.contains(""), ErrorCode::SchemaError,
          "record choices must be four distinct non-empty texts");

  Rng rng(combine(seed, fnv1a64(out.qa.id)));
  std::vector<int> distractors;
  for (int i = 0; i < 4; ++i) {
    if (i != gold) distractors.push_back(i);
  }
  const int dropped = distractors[rng.index(distractors.size())];
  for (int i = 0; i < 4; ++i) {
    if (i == dropped) continue;
    if (i == gold) out.qa.answer_index = static_cast<int>(out.qa.choices.size());
    out.qa.choices.push_back(choices[static_cast<std::size_t>(i)]);
  }

  fs::path path(record.at("image_path").get<std::string>());
  if (path.is_relative()) path = base_dir / path;
  path = fs::absolute(path).lexically_normal();
  ImageRef ref;
  ref.path = path.string();
  ref.id = external_image_id(path);
  out.caption_prefix = captioner.caption(ref);
  out.image = std::move(ref);
  return out;
}

}  // namespace mmcr
