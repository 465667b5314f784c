// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmcr/backends/types.hpp"
#include "mmcr/common/io.hpp"

namespace mmcr {

enum class TripleSource { Base, Conceptualized };
enum class QASource { SyntheticKb, Vcr, Benchmark };

std::string to_string(TripleSource source);
std::string to_string(QASource source);
QASource parse_qa_source(const std::string& text);

struct KnowledgeTriple {
  std::string head;
  std::string relation;
  std::string tail;
  TripleSource source = TripleSource::Base;
};

struct QAPair {
  std::string id;
  std::string question;
  std::vector<std::string> choices;
  int answer_index = 0;
  QASource source = QASource::SyntheticKb;
};

struct VQAPair {
  QAPair qa;
  std::optional<ImageRef> image;  // absent for text-only benchmark items
  std::optional<std::string> caption_prefix;

  // Question as fed to the text scorer: caption prefix (if any) + question.
  std::string rendered_question() const;
};

// Throws InvalidInput unless the pair has >= 2 pairwise-distinct non-empty
// choices and a valid gold index.
void validate(const QAPair& qa);

// {head, relation, tail, source?}; SchemaError on missing fields.
KnowledgeTriple triple_from_json(const Json& j);

// Normalized line format:
// {id, question, caption?, choices[], answer_index, image_path?, source}.
// Relative image paths are written against `base_dir` and resolved against it
// on read.
OrderedJson pair_to_json(const VQAPair& pair, const fs::path& base_dir);
VQAPair pair_from_json(const Json& j, const fs::path& base_dir);

void write_pairs(const fs::path& path, const std::vector<VQAPair>& pairs);
std::vector<VQAPair> read_pairs(const fs::path& path);

// Content-derived id for an image that was not produced by the generator.
std::string external_image_id(const fs::path& path);

}  // namespace mmcr
