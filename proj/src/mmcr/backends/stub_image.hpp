// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmcr/backends/interfaces.hpp"

namespace mmcr {

// Side length of stub rasters unless a descriptor overrides "raster".
inline constexpr std::uint32_t kDefaultRasterSize = 56;

// 8-bit grayscale raster.
struct Raster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * width + x]; }
  bool operator==(const Raster&) const = default;
};

// Header of a stub image artifact ("MMCRIMG1" container).
struct StubImageHeader {
  std::uint32_t resolution = 0;
  std::uint32_t steps = 0;
  std::uint64_t seed = 0;
  std::string prompt_hash;

  bool operator==(const StubImageHeader&) const = default;
};

std::string encode_stub_image(const StubImageHeader& header, const Raster& raster);
// Returns nullopt when `bytes` is not a stub container; SchemaError when it
// is one but truncated.
std::optional<std::pair<StubImageHeader, Raster>> decode_stub_image(const std::vector<std::uint8_t>& bytes);

// Loads the pixels behind an ImageRef. Stub containers are decoded; any other
// existing file (e.g. a real photo referenced by a visual-QA record) is
// replaced by a raster synthesized from (id, seed). Missing files raise
// MissingImage.
Raster load_raster(const ImageRef& image, std::uint64_t seed, std::uint32_t fallback_size);

// Writes a grayscale PNG.
void write_png(const std::filesystem::path& path, const Raster& raster);

// Content words of the prompt become fixed sprites on a 14x14 cell layout:
// a 3x3-cell block tiled with the word's own 4x4 binary pattern (position and
// pattern depend only on the word), over seeded background noise whose
// amplitude falls with the step count.
class StubImageGenerator final : public ImageGenerator {
 public:
  static constexpr std::uint32_t kLayoutCells = 14;
  static constexpr std::uint32_t kSpriteCells = 3;

  explicit StubImageGenerator(BackendDescriptor descriptor);
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  ImageRef generate(const std::string& prompt, std::uint32_t resolution, std::uint32_t steps,
                    const std::filesystem::path& images_dir) const override;

  Raster render(const std::string& prompt, std::uint32_t steps) const;
  std::uint32_t raster_size() const noexcept { return raster_; }

 private:
  BackendDescriptor descriptor_;
  std::uint64_t seed_;
  std::uint32_t raster_;
};

// Patch-grid encoder: each grid cell is sampled at 4x4 points, scaled to
// [-1, 1] and mapped through v = tanh(W px). There is no bias, so flat gray
// background encodes to ~0 and sprites dominate pooled features.
class StubVisualEncoder final : public VisualEncoder {
 public:
  static constexpr std::size_t kSamples = 16;

  explicit StubVisualEncoder(BackendDescriptor descriptor);
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::size_t feature_dim() const override { return dim_; }
  VisualFeatures encode(const ImageRef& image) const override;
  ParamSet frozen_parameters() const override;

  VisualFeatures encode_raster(const Raster& raster) const;
  std::size_t grid_rows() const noexcept { return rows_; }
  std::size_t grid_cols() const noexcept { return cols_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  BackendDescriptor descriptor_;
  std::size_t dim_;
  std::size_t rows_;
  std::size_t cols_;
  std::uint64_t seed_;
  Tensor weight_;
};

class StubCaptioner final : public Captioner {
 public:
  explicit StubCaptioner(BackendDescriptor descriptor);
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::string caption(const ImageRef& image) const override;

 private:
  BackendDescriptor descriptor_;
  std::uint64_t seed_;
};

// Convenience wrappers over default-configured stubs.
VisualFeatures stub_encode_image(const ImageRef& image, std::uint64_t seed);
ImageRef stub_generate_image(const std::string& prompt, std::uint32_t resolution, std::uint32_t steps,
                             std::uint64_t seed, const std::filesystem::path& images_dir);
std::string stub_caption(const ImageRef& image);

}  // namespace mmcr
