// SPDX-License-Identifier: Apache-2.0
#include "mmcr/evaluation/benchmark.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/rng.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

namespace {

std::string str(const Json& j, const char* key) {
  require(j.contains(key) && j[key].is_string(), ErrorCode::SchemaError,
          fmt::format("missing or non-string field '{}'", key));
  return j[key].get<std::string>();
}

// Labels arrive as ints or digit strings depending on the release.
int label(const Json& j, const char* key) {
  require(j.contains(key), ErrorCode::SchemaError, fmt::format("missing field '{}'", key));
  const Json& v = j[key];
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    require(!s.empty() && std::all_of(s.begin(), s.end(), ::isdigit), ErrorCode::SchemaError,
            fmt::format("field '{}' is not an integer label: {}", key, s));
    return std::stoi(s);
  }
  fail(ErrorCode::SchemaError, fmt::format("field '{}' is not an integer label", key));
}

QAPair from_csqa(const Json& j) {
  require(j.contains("question") && j["question"].is_object(), ErrorCode::SchemaError, "missing question object");
  const Json& q = j["question"];
  require(q.contains("choices") && q["choices"].is_array(), ErrorCode::SchemaError, "missing question.choices");
  QAPair p;
  p.question = str(q, "stem");
  const std::string key = str(j, "answerKey");
  p.answer_index = -1;
  for (const auto& c : q["choices"]) {
    if (str(c, "label") == key) p.answer_index = static_cast<int>(p.choices.size());
    p.choices.push_back(str(c, "text"));
  }
  require(p.answer_index >= 0, ErrorCode::SchemaError, "answerKey " + key + " matches no choice label");
  return p;
}

QAPair from_piqa(const Json& j) {
  return {"", str(j, "goal"), {str(j, "sol1"), str(j, "sol2")}, label(j, "label"), QASource::Benchmark};
}

QAPair from_siqa(const Json& j) {
  return {"", str(j, "context") + " " + str(j, "question"),
          {str(j, "answerA"), str(j, "answerB"), str(j, "answerC")}, label(j, "label") - 1, QASource::Benchmark};
}

// The blank splits the sentence: the prefix conditions, option + suffix is scored.
QAPair from_winogrande(const Json& j) {
  const std::string sentence = str(j, "sentence");
  const auto blank = sentence.find('_');
  require(blank != std::string::npos, ErrorCode::SchemaError, "winogrande sentence has no '_' blank");
  const std::string prefix = trim(sentence.substr(0, blank));
  const std::string suffix = sentence.substr(blank + 1);
  return {"", prefix,
          {str(j, "option1") + suffix, str(j, "option2") + suffix},
          label(j, "answer") - 1,
          QASource::Benchmark};
}

QAPair from_anli(const Json& j) {
  const std::string obs2 = str(j, "obs2");
  return {"", str(j, "obs1"), {str(j, "hyp1") + " " + obs2, str(j, "hyp2") + " " + obs2}, label(j, "label") - 1,
          QASource::Benchmark};
}

// The release lists the correct answer first; shuffle by item key so gold
// position carries no signal.
QAPair from_sciq(const Json& j, const std::string& key) {
  QAPair p{"", str(j, "question"),
           {str(j, "correct_answer"), str(j, "distractor1"), str(j, "distractor2"), str(j, "distractor3")},
           0,
           QASource::Benchmark};
  std::vector<int> order{0, 1, 2, 3};
  Rng(fnv1a64(key, 0x5c19)).shuffle(order);
  std::vector<std::string> shuffled;
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.push_back(p.choices[static_cast<std::size_t>(order[i])]);
    if (order[i] == 0) p.answer_index = static_cast<int>(i);
  }
  p.choices = std::move(shuffled);
  return p;
}

QAPair from_normalized(const Json& j) {
  QAPair p;
  p.question = str(j, "question");
  require(j.contains("choices") && j["choices"].is_array(), ErrorCode::SchemaError, "missing choices array");
  for (const auto& c : j["choices"]) {
    require(c.is_string(), ErrorCode::SchemaError, "choices must be strings");
    p.choices.push_back(c.get<std::string>());
  }
  p.answer_index = label(j, "answer_index");
  p.source = QASource::Benchmark;
  return p;
}

}  // namespace

const fs::path& BenchmarkSpec::split(const std::string& split_name) const {
  auto it = splits.find(split_name);
  require(it != splits.end(), ErrorCode::InvalidInput, "benchmark " + name + " has no split " + split_name);
  return it->second;
}

std::vector<std::string> known_benchmark_names() {
  return {"aNLI", "ARC-C", "ARC-E", "CSQA", "OBQA", "PIQA", "QASC", "SciQ", "SIQA", "WG"};
}

BenchmarkSpec known_benchmark(const std::string& name, std::map<std::string, fs::path> splits) {
  static const std::map<std::string, std::pair<std::string, int>> table{
      {"aNLI", {"anli", 2}}, {"ARC-C", {"csqa", 0}}, {"ARC-E", {"csqa", 0}}, {"CSQA", {"csqa", 5}},
      {"OBQA", {"csqa", 4}}, {"PIQA", {"piqa", 2}},  {"QASC", {"csqa", 8}},  {"SciQ", {"sciq", 4}},
      {"SIQA", {"siqa", 3}}, {"WG", {"winogrande", 2}},
  };
  auto it = table.find(name);
  require(it != table.end(), ErrorCode::InvalidInput, "unknown benchmark: " + name);
  return {name, it->second.first, it->second.second, std::move(splits)};
}

std::vector<QAPair> load_benchmark(const BenchmarkSpec& spec, const std::string& split) {
  static const std::vector<std::string> formats{"normalized", "csqa", "piqa", "siqa", "winogrande", "anli", "sciq"};
  require(std::find(formats.begin(), formats.end(), spec.format) != formats.end(), ErrorCode::InvalidInput,
          "unknown benchmark format: " + spec.format);
  const fs::path& path = spec.split(split);
  require(fs::exists(path), ErrorCode::IoError, "benchmark file not found: " + path.string());

  std::vector<QAPair> out;
  for_each_jsonl(path, [&](std::size_t line, const Json& j) {
    require(j.is_object(), ErrorCode::SchemaError, "record is not a JSON object");
    const std::string key =
        j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : fmt::format("{}-{}", spec.name, line);
    QAPair p;
    if (spec.format == "normalized") p = from_normalized(j);
    else if (spec.format == "csqa") p = from_csqa(j);
    else if (spec.format == "piqa") p = from_piqa(j);
    else if (spec.format == "siqa") p = from_siqa(j);
    else if (spec.format == "winogrande") p = from_winogrande(j);
    else if (spec.format == "anli") p = from_anli(j);
    else p = from_sciq(j, key);
    p.id = key;
    p.source = QASource::Benchmark;
    if (spec.n_choices > 0) {
      require(p.choices.size() == static_cast<std::size_t>(spec.n_choices), ErrorCode::SchemaError,
              fmt::format("expected {} choices, found {}", spec.n_choices, p.choices.size()));
    }
    require(p.answer_index >= 0 && static_cast<std::size_t>(p.answer_index) < p.choices.size(),
            ErrorCode::SchemaError,
            fmt::format("answer index {} out of range for {} choices", p.answer_index, p.choices.size()));
    try {
      validate(p);
    } catch (const Error& e) {
      fail(ErrorCode::SchemaError, e.what());
    }
    out.push_back(std::move(p));
  });
  return out;
}

AccuracyResult accuracy(std::span<const Prediction> predictions, std::span<const Gold> golds) {
  require(predictions.size() == golds.size(), ErrorCode::AlignmentError,
          fmt::format("{} predictions for {} gold labels", predictions.size(), golds.size()));
  AccuracyResult r;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    require(predictions[i].id == golds[i].id, ErrorCode::AlignmentError,
            fmt::format("item {}: prediction id '{}' does not match gold id '{}'", i, predictions[i].id, golds[i].id));
    if (!predictions[i].ok()) {
      ++r.excluded;
      continue;
    }
    ++r.total;
    r.correct += predictions[i].predicted_index == golds[i].answer_index;
  }
  require(r.total > 0, ErrorCode::InvalidInput, "no evaluable items");
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

std::vector<Gold> golds_of(const std::vector<VQAPair>& pairs) {
  std::vector<Gold> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.qa.id, p.qa.answer_index});
  return out;
}

}  // namespace mmcr
