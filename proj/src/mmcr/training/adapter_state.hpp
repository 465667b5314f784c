// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "mmcr/common/tensor.hpp"

namespace mmcr {

// The two trainable parameter groups layered on a frozen backbone.
//
// LM adapter (names "lm.*"): parallel bottleneck adapter feeding the
// token-prediction head. ITM adapter (names "itm.*"): parallel bottleneck
// adapter on the context vector plus the affine d_v -> d_t projection of the
// visual patches. Bottleneck width is text_dim / reduction_factor (>= 1).
//
// `backbone` is empty except in the full fine-tuning ablation, where it holds
// trained copies of the text backbone that override the frozen weights.
struct AdapterState {
  ParamSet lm;
  ParamSet itm;
  ParamSet backbone;
  int reduction_factor = 16;
  std::size_t text_dim = 0;
  std::size_t visual_dim = 0;
  bool adapters_enabled = true;

  static AdapterState initialize(std::size_t text_dim, std::size_t visual_dim, int reduction_factor,
                                 std::uint64_t seed);

  std::size_t bottleneck() const noexcept;
  std::size_t trainable_count() const noexcept;

  // Throws InvalidInput if the name sets intersect, a name lacks its group
  // prefix, or a shape disagrees with text_dim / visual_dim.
  void validate() const;

  std::string checksum() const;
};

// Gradient buffers shaped like an AdapterState.
struct AdapterGrads {
  ParamSet lm;
  ParamSet itm;
  ParamSet backbone;

  static AdapterGrads zeros_for(const AdapterState& state, const ParamSet& trainable_backbone);
  void scale(double factor);
  void add(const AdapterGrads& other);
};

}  // namespace mmcr
