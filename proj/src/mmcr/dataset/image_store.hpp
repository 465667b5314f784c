// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "mmcr/backends/interfaces.hpp"
#include "mmcr/dataset/types.hpp"

namespace mmcr {

// Content-addressed image cache over a generator: images/<sha256(prompt)>.img.
// A cached artifact is reused only if its header matches the request
// (resolution, steps, generator seed, prompt digest); a mismatching file is a
// StorageError rather than a silent overwrite.
class ImageStore {
 public:
  ImageStore(fs::path images_dir, std::shared_ptr<const ImageGenerator> generator, int max_attempts = 3);

  ImageRef get(const std::string& prompt, std::uint32_t resolution, std::uint32_t steps);

  const fs::path& images_dir() const noexcept { return dir_; }
  std::size_t generator_calls() const noexcept { return calls_; }
  std::size_t cache_hits() const noexcept { return hits_; }

 private:
  fs::path dir_;
  std::shared_ptr<const ImageGenerator> generator_;
  int max_attempts_;
  std::size_t calls_ = 0;
  std::size_t hits_ = 0;
};

// Generates (or fetches) the image for the pair's question. Raises
// GenerationError when every attempt fails.
VQAPair attach_image(const QAPair& qa, ImageStore& store, std::uint32_t resolution, std::uint32_t steps);

}  // namespace mmcr
