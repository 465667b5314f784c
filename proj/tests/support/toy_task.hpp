// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mmcr/backends/interfaces.hpp"
#include "mmcr/dataset/types.hpp"

namespace mmcr::testing {

// Three-choice task with two kinds of items:
//  - text items: a cue word in the question determines the answer word;
//    the image is an unrelated scene.
//  - image items: one shared question, the choices are concept words and
//    only the image (rendered from a hidden prompt containing the gold
//    concept) tells them apart.
// Dev items come in groups of three that share choices and background and
// rotate the gold position, so any gold-blind predictor scores 1/3.
struct ToyTask {
  std::vector<VQAPair> train;
  std::vector<VQAPair> dev;
};

struct ToyTaskConfig {
  std::size_t train_items = 1000;
  std::size_t dev_items = 200;
  std::size_t text_pairs = 12;
  std::size_t image_concepts = 12;
  std::uint64_t seed = 11;
};

ToyTask make_toy_task(const ToyTaskConfig& cfg, const ImageGenerator& generator,
                      const std::filesystem::path& images_dir);

}  // namespace mmcr::testing
