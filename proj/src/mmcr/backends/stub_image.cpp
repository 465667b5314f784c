// SPDX-License-Identifier: Apache-2.0
#include "mmcr/backends/stub_image.hpp"

#include <fmt/format.h>
#include <png.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/io.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

namespace {

constexpr char kMagic[8] = {'M', 'M', 'C', 'R', 'I', 'M', 'G', '1'};
constexpr std::uint32_t kDefaultRaster = kDefaultRasterSize;

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return value;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= bytes_.size(), ErrorCode::SchemaError, "truncated stub image container");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 8;
};

Raster noise_raster(std::uint32_t size, std::uint64_t key) {
  Raster r{size, size, std::vector<std::uint8_t>(std::size_t{size} * size)};
  SplitMix64 gen(key);
  for (auto& p : r.pixels) p = static_cast<std::uint8_t>(gen.next() >> 56);
  return r;
}

std::uint64_t descriptor_seed(const BackendDescriptor& d) { return static_cast<std::uint64_t>(d.get("seed", 0)); }

}  // namespace

std::string encode_stub_image(const StubImageHeader& header, const Raster& raster) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, header.resolution);
  put_le<std::uint32_t>(out, header.steps);
  put_le<std::uint64_t>(out, header.seed);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(header.prompt_hash.size()));
  out += header.prompt_hash;
  put_le<std::uint32_t>(out, raster.width);
  put_le<std::uint32_t>(out, raster.height);
  out.append(reinterpret_cast<const char*>(raster.pixels.data()), raster.pixels.size());
  return out;
}

std::optional<std::pair<StubImageHeader, Raster>> decode_stub_image(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) return std::nullopt;
  Reader in(bytes);
  StubImageHeader h;
  h.resolution = in.get<std::uint32_t>();
  h.steps = in.get<std::uint32_t>();
  h.seed = in.get<std::uint64_t>();
  h.prompt_hash = in.bytes(in.get<std::uint32_t>());
  Raster r;
  r.width = in.get<std::uint32_t>();
  r.height = in.get<std::uint32_t>();
  require(r.width > 0 && r.height > 0, ErrorCode::SchemaError, "stub image has an empty raster");
  const std::string px = in.bytes(std::size_t{r.width} * r.height);
  r.pixels.assign(px.begin(), px.end());
  return std::make_pair(std::move(h), std::move(r));
}

Raster load_raster(const ImageRef& image, std::uint64_t seed, std::uint32_t fallback_size) {
  std::error_code ec;
  if (image.path.empty() || !fs::is_regular_file(image.path, ec)) {
    fail(ErrorCode::MissingImage, "image not found: " + (image.path.empty() ? image.id : image.path));
  }
  auto decoded = decode_stub_image(read_binary_file(image.path));
  if (decoded) return std::move(decoded->second);
  return noise_raster(fallback_size, combine(seed, fnv1a64(image.id)));
}

void write_png(const std::filesystem::path& path, const Raster& raster) {
  require(raster.width > 0 && raster.height > 0, ErrorCode::InvalidInput, "cannot write an empty raster");
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (fp == nullptr) fail(ErrorCode::StorageError, "cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    fail(ErrorCode::StorageError, "PNG encoding failed: " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, raster.width, raster.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::uint32_t y = 0; y < raster.height; ++y) {
    png_write_row(png, raster.pixels.data() + std::size_t{y} * raster.width);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) fail(ErrorCode::StorageError, "PNG write failed: " + path.string());
}

// ---------------------------------------------------------------------------

StubImageGenerator::StubImageGenerator(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
  descriptor_.kind = BackendKind::T2IGenerator;
  descriptor_.validate();
  seed_ = descriptor_seed(descriptor_);
  raster_ = static_cast<std::uint32_t>(descriptor_.get("raster", kDefaultRaster));
  descriptor_.config["seed"] = static_cast<std::int64_t>(seed_);
  descriptor_.config["raster"] = raster_;
}

Raster StubImageGenerator::render(const std::string& prompt, std::uint32_t steps) const {
  Raster r{raster_, raster_, std::vector<std::uint8_t>(std::size_t{raster_} * raster_)};
  // Background: mid-gray plus noise; more denoising steps, cleaner canvas.
  const double amplitude = 32.0 * 10.0 / (10.0 + static_cast<double>(steps));
  SplitMix64 noise(combine(seed_, fnv1a64(prompt)));
  for (auto& p : r.pixels) {
    p = static_cast<std::uint8_t>(std::lround(127.5 + noise.uniform(-amplitude, amplitude)));
  }

  // Each word owns a 4x4 binary pattern, tiled over a 2x2-cell block.
  const std::uint32_t cell = std::max<std::uint32_t>(1, raster_ / kLayoutCells);
  for (const auto& word : content_words(prompt)) {
    const std::uint64_t h = fnv1a64(word, 0x5eedULL);
    const std::uint32_t row0 = static_cast<std::uint32_t>(h % (kLayoutCells - kSpriteCells + 1));
    const std::uint32_t col0 = static_cast<std::uint32_t>((h >> 16) % (kLayoutCells - kSpriteCells + 1));
    const std::uint64_t pattern = mix64(h);
    for (std::uint32_t y = row0 * cell; y < (row0 + kSpriteCells) * cell && y < raster_; ++y) {
      for (std::uint32_t x = col0 * cell; x < (col0 + kSpriteCells) * cell && x < raster_; ++x) {
        const std::uint32_t bit = ((y % cell) * 4 / cell) * 4 + (x % cell) * 4 / cell;
        r.pixels[std::size_t{y} * raster_ + x] = ((pattern >> bit) & 1) ? 230 : 25;
      }
    }
  }
  return r;
}

ImageRef StubImageGenerator::generate(const std::string& prompt, std::uint32_t resolution, std::uint32_t steps,
                                      const std::filesystem::path& images_dir) const {
  require(resolution > 0 && steps > 0, ErrorCode::InvalidInput, "resolution and steps must be positive");
  const std::string hash = sha256_hex(prompt);
  const fs::path path = images_dir / (hash + ".img");
  const StubImageHeader header{resolution, steps, seed_, hash};
  try {
    fs::create_directories(images_dir);
    write_file_atomic(path, encode_stub_image(header, render(prompt, steps)));
  } catch (const Error& e) {
    fail(ErrorCode::StorageError, e.what());
  } catch (const fs::filesystem_error& e) {
    fail(ErrorCode::StorageError, e.what());
  }
  return ImageRef{"img_" + hash.substr(0, 16), path.string(), resolution, descriptor_.name, hash};
}

// ---------------------------------------------------------------------------

StubVisualEncoder::StubVisualEncoder(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
  descriptor_.kind = BackendKind::VisualEncoder;
  descriptor_.validate();
  dim_ = static_cast<std::size_t>(descriptor_.get("feature_dim", 32));
  rows_ = static_cast<std::size_t>(descriptor_.get("grid_rows", 14));
  cols_ = static_cast<std::size_t>(descriptor_.get("grid_cols", 14));
  seed_ = descriptor_seed(descriptor_);
  descriptor_.config["feature_dim"] = static_cast<std::int64_t>(dim_);
  descriptor_.config["grid_rows"] = static_cast<std::int64_t>(rows_);
  descriptor_.config["grid_cols"] = static_cast<std::int64_t>(cols_);
  descriptor_.config["seed"] = static_cast<std::int64_t>(seed_);
  weight_ = Tensor::matrix(dim_, kSamples);
  SplitMix64 gen(combine(seed_, fnv1a64("vision.patch")));
  const double bound = 1.5 * std::sqrt(3.0 / static_cast<double>(kSamples));
  for (auto& w : weight_.values) w = gen.uniform(-bound, bound);
}

ParamSet StubVisualEncoder::frozen_parameters() const {
  return {{"vision.patch.weight", weight_}};
}

VisualFeatures StubVisualEncoder::encode_raster(const Raster& raster) const {
  VisualFeatures f{rows_, cols_, dim_, std::vector<double>(rows_ * cols_ * dim_)};
  std::array<double, kSamples> px{};
  for (std::size_t pr = 0; pr < rows_; ++pr) {
    for (std::size_t pc = 0; pc < cols_; ++pc) {
      for (std::size_t k = 0; k < kSamples; ++k) {
        const double fy = (static_cast<double>(pr) + (2.0 * static_cast<double>(k / 4) + 1.0) / 8.0) /
                          static_cast<double>(rows_);
        const double fx = (static_cast<double>(pc) + (2.0 * static_cast<double>(k % 4) + 1.0) / 8.0) /
                          static_cast<double>(cols_);
        const auto y = std::min<std::uint32_t>(raster.height - 1, static_cast<std::uint32_t>(fy * raster.height));
        const auto x = std::min<std::uint32_t>(raster.width - 1, static_cast<std::uint32_t>(fx * raster.width));
        px[k] = raster.at(x, y) / 127.5 - 1.0;
      }
      std::span<double> out(f.patches.data() + (pr * cols_ + pc) * dim_, dim_);
      matvec(weight_, px, out);
      for (auto& v : out) v = std::tanh(v);
    }
  }
  return f;
}

VisualFeatures StubVisualEncoder::encode(const ImageRef& image) const {
  return encode_raster(load_raster(image, seed_, kDefaultRaster));
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<const char*, 16> kCaptionAdjectives = {
    "small", "large", "bright", "dark", "crowded", "quiet", "busy", "empty",
    "sunny", "rainy", "old", "modern", "narrow", "wide", "cozy", "noisy"};
constexpr std::array<const char*, 32> kCaptionSubjects = {
    "person", "dog", "table", "car", "window", "door", "chair", "bicycle",
    "kitchen", "street", "tree", "lamp", "book", "phone", "cup", "bag",
    "bench", "river", "bridge", "shop", "desk", "bed", "horse", "train",
    "boat", "garden", "fence", "clock", "mirror", "sofa", "umbrella", "bus"};
constexpr std::array<const char*, 16> kCaptionPlaces = {
    "a room", "a park", "a city street", "an office", "a restaurant", "a field", "a station", "a beach",
    "a market", "a hallway", "a classroom", "a yard", "a bar", "a forest", "a stage", "a parking lot"};

}  // namespace

StubCaptioner::StubCaptioner(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
  descriptor_.kind = BackendKind::Captioner;
  descriptor_.validate();
  seed_ = descriptor_seed(descriptor_);
  descriptor_.config["seed"] = static_cast<std::int64_t>(seed_);
}

std::string StubCaptioner::caption(const ImageRef& image) const {
  std::error_code ec;
  if (image.path.empty() || !fs::exists(image.path, ec)) {
    fail(ErrorCode::MissingImage, "image not found: " + (image.path.empty() ? image.id : image.path));
  }
  SplitMix64 gen(combine(seed_, fnv1a64(image.id)));
  const char* adj = kCaptionAdjectives[gen.next() % kCaptionAdjectives.size()];
  const char* a = kCaptionSubjects[gen.next() % kCaptionSubjects.size()];
  const char* b = kCaptionSubjects[gen.next() % kCaptionSubjects.size()];
  const char* place = kCaptionPlaces[gen.next() % kCaptionPlaces.size()];
  return fmt::format("a {} {} next to a {} in {}.", adj, a, b, place);
}

// ---------------------------------------------------------------------------

namespace {

BackendDescriptor seeded(BackendKind kind, std::uint64_t seed) {
  return BackendDescriptor{kind, "stub", {{"seed", static_cast<std::int64_t>(seed)}}};
}

}  // namespace

VisualFeatures stub_encode_image(const ImageRef& image, std::uint64_t seed) {
  return StubVisualEncoder(seeded(BackendKind::VisualEncoder, seed)).encode(image);
}

ImageRef stub_generate_image(const std::string& prompt, std::uint32_t resolution, std::uint32_t steps,
                             std::uint64_t seed, const std::filesystem::path& images_dir) {
  return StubImageGenerator(seeded(BackendKind::T2IGenerator, seed)).generate(prompt, resolution, steps, images_dir);
}

std::string stub_caption(const ImageRef& image) {
  return StubCaptioner(seeded(BackendKind::Captioner, 0)).caption(image);
}

}  // namespace mmcr
