// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "mmcr/backends/types.hpp"
#include "mmcr/common/tensor.hpp"

namespace mmcr {

struct AdapterState;

// A scored text: `context` is conditioning only, `target` tokens are the ones
// whose log-probabilities are returned. The context vector covers both.
struct TextInput {
  std::vector<std::string> context;
  std::vector<std::string> target;
};

// Language-model role. Token log-probabilities are computed through the LM
// adapter and the context vector through the ITM adapter when adapters are
// given; with nullptr the frozen backbone alone is used.
class TextScorer {
 public:
  virtual ~TextScorer() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  virtual std::size_t feature_dim() const = 0;
  virtual ScoringMode default_mode() const = 0;
  virtual TextFeatures encode(const TextInput& input, ScoringMode mode,
                              const AdapterState* adapters = nullptr) const = 0;
  virtual ParamSet frozen_parameters() const = 0;
};

// Image feature extractor producing a patch grid.
class VisualEncoder {
 public:
  virtual ~VisualEncoder() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  virtual std::size_t feature_dim() const = 0;
  virtual VisualFeatures encode(const ImageRef& image) const = 0;
  virtual ParamSet frozen_parameters() const = 0;
};

// Text-to-image role. Always renders; caching is the caller's job (see
// ImageStore) so that a warm cache provably makes zero generator calls.
class ImageGenerator {
 public:
  virtual ~ImageGenerator() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  virtual ImageRef generate(const std::string& prompt, std::uint32_t resolution, std::uint32_t steps,
                            const std::filesystem::path& images_dir) const = 0;
};

class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  virtual std::string caption(const ImageRef& image) const = 0;
};

struct Backends {
  std::shared_ptr<const TextScorer> text;
  std::shared_ptr<const VisualEncoder> vision;
  std::shared_ptr<const ImageGenerator> generator;
  std::shared_ptr<const Captioner> captioner;

  std::vector<BackendDescriptor> descriptors() const;
  // Frozen parameters of every backend, keyed "text.*" / "vision.*".
  ParamSet frozen_parameters() const;
};

}  // namespace mmcr
