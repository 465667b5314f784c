// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mmcr/dataset/types.hpp"

namespace mmcr {

// Relation -> natural-language continuation, e.g. xWant -> "As a result,
// PersonX wanted to".
struct TemplateTable {
  std::string version;
  std::map<std::string, std::string> templates;

  const std::string& render(const std::string& relation) const;  // UnknownRelation if absent
};

// ATOMIC-style relations ("atomic-v1").
TemplateTable default_templates();
// {"version": "...", "templates": {"xWant": "As a result, PersonX wanted to", ...}}
TemplateTable load_templates(const fs::path& path);

// head + ". " + template. Trailing sentence punctuation on the head is kept
// single.
std::string render_question(const KnowledgeTriple& triple, const TemplateTable& table);

// Builds one multiple-choice item: the tail plus k distractors drawn
// uniformly from `distractor_pool`, rejecting the tail itself, repeats, and
// any candidate sharing a content word with the tail. Choice order is a
// seeded shuffle; the random stream is keyed by (seed, triple).
QAPair triple_to_qa(const KnowledgeTriple& triple, const std::vector<std::string>& distractor_pool, int k,
                    std::uint64_t seed, const TemplateTable& table);

// PersonX/PersonY/PersonZ plus common given names.
std::set<std::string> default_name_lexicon();
// One name per line or a JSON array of strings.
std::set<std::string> load_name_lexicon(const fs::path& path);

// Replaces every letter run that is in the lexicon with "Person"; all other
// characters are preserved. Idempotent.
std::string neutralize_names(const std::string& question, const std::set<std::string>& lexicon);

// Keeps the first pair for each exact (already neutralized) question.
std::vector<QAPair> dedup_questions(const std::vector<QAPair>& pairs);

}  // namespace mmcr
