// SPDX-License-Identifier: Apache-2.0
#include "mmcr/dataset/image_store.hpp"

#include <fmt/format.h>

#include "mmcr/backends/stub_image.hpp"
#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/log.hpp"

namespace mmcr {

ImageStore::ImageStore(fs::path images_dir, std::shared_ptr<const ImageGenerator> generator, int max_attempts)
    : dir_(std::move(images_dir)), generator_(std::move(generator)), max_attempts_(max_attempts) {
  require(generator_ != nullptr, ErrorCode::InvalidInput, "image store needs a generator");
  require(generator_->descriptor().kind == BackendKind::T2IGenerator, ErrorCode::InvalidInput,
          "image store backend must be a t2i_generator");
  require(max_attempts_ >= 1, ErrorCode::InvalidInput, "max_attempts must be >= 1");
}

ImageRef ImageStore::get(const std::string& prompt, std::uint32_t resolution, std::uint32_t steps) {
  const std::string hash = sha256_hex(prompt);
  const fs::path path = dir_ / (hash + ".img");
  const auto seed = static_cast<std::uint64_t>(generator_->descriptor().get("seed", 0));
  std::error_code ec;
  if (fs::exists(path, ec)) {
    auto decoded = decode_stub_image(read_binary_file(path));
    const StubImageHeader want{resolution, steps, seed, hash};
    if (!decoded || !(decoded->first == want)) {
      fail(ErrorCode::StorageError,
           fmt::format("cached image {} was produced with different settings; remove it or use a fresh "
                       "output directory",
                       path.string()));
    }
    ++hits_;
    return ImageRef{"img_" + hash.substr(0, 16), path.string(), resolution, generator_->descriptor().name, hash};
  }
  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
    ++calls_;
    try {
      return generator_->generate(prompt, resolution, steps, dir_);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::StorageError) throw;
      last_error = e.what();
      log::get().warn("image generation attempt {}/{} failed: {}", attempt, max_attempts_, last_error);
    }
  }
  fail(ErrorCode::GenerationError, "image generation failed for prompt digest " + hash + ": " + last_error);
}

VQAPair attach_image(const QAPair& qa, ImageStore& store, std::uint32_t resolution, std::uint32_t steps) {
  VQAPair p;
  p.qa = qa;
  p.image = store.get(qa.question, resolution, steps);
  return p;
}

}  // namespace mmcr
