// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmcr/inference/inference.hpp"

namespace mmcr::testing {

inline std::filesystem::path fixture_dir() { return MMCR_FIXTURE_DIR; }

// Fresh empty directory under the build tree's scratch area.
std::filesystem::path scratch_dir(const std::string& name);

// Two-choice score vector whose channel softmaxes are exactly (a, 1 - a)
// and (b, 1 - b).
ScoreVector two_way_scores(double a, double b);

// Ten scored items at lambda = 0.5: items 0-1 are helpful flips, item 2 is
// harmful, the other seven keep their text-only prediction.
std::vector<ScoredItem> flip_fixture();

// Four items where 0-1 need the image channel and 2-3 the text channel; only
// lambda in (0.48, 0.52) gets all of them right.
std::vector<ScoredItem> sweep_fixture();

}  // namespace mmcr::testing
