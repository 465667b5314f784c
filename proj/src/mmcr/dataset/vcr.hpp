// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmcr/backends/interfaces.hpp"
#include "mmcr/dataset/types.hpp"

namespace mmcr {

std::vector<std::string> default_neutral_names();

// Replaces person references with neutral names: index i becomes
// names[i mod len]; a group of indices is joined with "and". References are
// either integer arrays inside a token list or "[i]" / "[i, j]" in text.
// `person_count` (when >= 0) bounds the valid indices.
std::string render_vcr_text(const Json& tokens_or_text, const std::vector<std::string>& names,
                            long person_count);

// Converts one four-choice visual-QA record
//   {id?, question_tokens | question, choices[4], answer_index, image_path, person_boxes?}
// into a three-choice pair: one distractor is dropped by a seeded draw keyed
// by (seed, record id), the gold index is remapped, and the image caption is
// attached as the question prefix. Relative image paths resolve against
// `base_dir`. Malformed records raise SchemaError.
VQAPair harmonize_vcr(const Json& record, const std::vector<std::string>& neutral_names, std::uint64_t seed,
                      const Captioner& captioner, const fs::path& base_dir, const std::string& fallback_id);

}  // namespace mmcr
