// SPDX-License-Identifier: Apache-2.0
#include "mmcr/dataset/synthetic.hpp"

#include <cctype>
#include <unordered_set>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/rng.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

const std::string& TemplateTable::render(const std::string& relation) const {
  auto it = templates.find(relation);
  if (it == templates.end()) fail(ErrorCode::UnknownRelation, "no template for relation '" + relation + "'");
  return it->second;
}

TemplateTable default_templates() {
  return TemplateTable{"atomic-v1",
                       {
                           {"xWant", "As a result, PersonX wanted to"},
                           {"xIntent", "Because PersonX wanted to"},
                           {"xNeed", "Before, PersonX needed to"},
                           {"xEffect", "As a result, PersonX will"},
                           {"xReact", "As a result, PersonX felt"},
                           {"xAttr", "PersonX is seen as"},
                           {"oEffect", "As a result, others will"},
                           {"oReact", "As a result, others felt"},
                           {"oWant", "As a result, others wanted to"},
                           {"isAfter", "Before that,"},
                           {"isBefore", "After that,"},
                           {"HinderedBy", "This would not happen if"},
                       }};
}

TemplateTable load_templates(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::SchemaError, path.string() + ": invalid JSON: " + e.what());
  }
  require(j.is_object() && j.contains("templates") && j.at("templates").is_object(), ErrorCode::SchemaError,
          path.string() + ": expected {\"version\", \"templates\": {...}}");
  TemplateTable t;
  t.version = j.value("version", path.stem().string());
  for (const auto& [rel, text] : j.at("templates").items()) {
    require(text.is_string() && !text.get<std::string>().empty(), ErrorCode::SchemaError,
            path.string() + ": template for " + rel + " must be a non-empty string");
    t.templates.emplace(rel, text.get<std::string>());
  }
  require(!t.templates.empty(), ErrorCode::SchemaError, path.string() + ": no templates");
  return t;
}

std::string render_question(const KnowledgeTriple& triple, const TemplateTable& table) {
  const std::string& tmpl = table.render(triple.relation);
  std::string head = trim(triple.head);
  while (!head.empty() && (head.back() == '.' || head.back() == ' ')) head.pop_back();
  return head + ". " + tmpl;
}

QAPair triple_to_qa(const KnowledgeTriple& triple, const std::vector<std::string>& distractor_pool, int k,
                    std::uint64_t seed, const TemplateTable& table) {
  require(k >= 1, ErrorCode::InvalidInput, "distractor count must be >= 1");
  QAPair qa;
  qa.question = render_question(triple, table);
  qa.source = QASource::SyntheticKb;
  const std::string key = triple.head + '\x1f' + triple.relation + '\x1f' + triple.tail;
  qa.id = "kb_" + sha256_hex(key).substr(0, 16);

  const auto gold_words = content_words(triple.tail);
  const std::unordered_set<std::string> gold_set(gold_words.begin(), gold_words.end());
  auto overlaps = [&](const std::string& cand) {
    for (const auto& w : content_words(cand)) {
      if (gold_set.contains(w)) return true;
    }
    return false;
  };

  Rng rng(combine(seed, fnv1a64(key)));
  std::vector<std::string> choices{triple.tail};
  std::unordered_set<std::string> taken{triple.tail};
  auto consider = [&](const std::string& cand) {
    if (cand.empty() || taken.contains(cand) || overlaps(cand)) return;
    taken.insert(cand);
    choices.push_back(cand);
  };
  const auto wanted = static_cast<std::size_t>(k) + 1;
  // Rejection sampling keeps large pools cheap; a shuffled scan settles
  // small or heavily-rejecting pools exactly.
  if (!distractor_pool.empty()) {
    for (std::size_t attempt = 0; attempt < 32 * wanted && choices.size() < wanted; ++attempt) {
      consider(distractor_pool[rng.index(distractor_pool.size())]);
    }
  }
  if (choices.size() < wanted) {
    std::vector<std::size_t> order(distractor_pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t idx : order) {
      if (choices.size() == wanted) break;
      consider(distractor_pool[idx]);
    }
  }
  if (static_cast<int>(choices.size()) < k + 1) {
    fail(ErrorCode::PoolExhausted, "not enough distractors for '" + triple.tail + "' (need " +
                                       std::to_string(k) + ", found " + std::to_string(choices.size() - 1) + ")");
  }
  rng.shuffle(choices);
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i] == triple.tail) qa.answer_index = static_cast<int>(i);
  }
  qa.choices = std::move(choices);
  return qa;
}

std::set<std::string> default_name_lexicon() {
  return {"PersonX", "PersonY", "PersonZ", "Alex",   "Sam",     "Chris",  "Jordan", "Taylor", "Morgan",
          "Casey",   "Jamie",   "Riley",   "John",   "Mary",    "James",  "Linda",  "Robert", "Michael",
          "David",   "Sarah",   "Emily",   "Tom",    "Anna",    "Kate",   "Mike",   "Lisa",   "Peter"};
}

std::set<std::string> load_name_lexicon(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::set<std::string> names;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    for (const auto& v : Json::parse(text)) names.insert(v.get<std::string>());
  } else {
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      auto name = trim(std::string_view(text).substr(start, end - start));
      if (!name.empty()) names.insert(name);
      start = end + 1;
    }
  }
  require(!names.empty(), ErrorCode::InvalidInput, "name lexicon is empty: " + path.string());
  return names;
}

std::string neutralize_names(const std::string& question, const std::set<std::string>& lexicon) {
  require(!lexicon.empty(), ErrorCode::InvalidInput, "name lexicon is empty");
  std::string out;
  out.reserve(question.size());
  std::size_t i = 0;
  while (i < question.size()) {
    if (!std::isalpha(static_cast<unsigned char>(question[i]))) {
      out.push_back(question[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < question.size() && std::isalpha(static_cast<unsigned char>(question[j]))) ++j;
    const std::string word = question.substr(i, j - i);
    out += lexicon.contains(word) ? std::string("Person") : word;
    i = j;
  }
  return out;
}

std::vector<QAPair> dedup_questions(const std::vector<QAPair>& pairs) {
  std::unordered_set<std::string> seen;
  std::vector<QAPair> out;
  for (const auto& p : pairs) {
    if (seen.insert(p.question).second) out.push_back(p);
  }
  return out;
}

}  // namespace mmcr
