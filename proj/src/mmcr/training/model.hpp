// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mmcr/backends/toy_text.hpp"
#include "mmcr/training/loss.hpp"

namespace mmcr {

// Differentiable view of score_choices over the trainable toy text scorer.
// Visual features are frozen and cached per image.
class TrainableModel {
 public:
  // InvalidInput unless backends.text is the built-in trainable scorer.
  TrainableModel(const Backends& backends, ScoringMode mode);

  struct ItemPass {
    ScoreVector scores;
    std::vector<ToyTextScorer::Trace> traces;
    std::vector<ItmResult> itm;
    std::shared_ptr<const VisualFeatures> visual;
  };

  ItemPass forward(const VQAPair& pair, const AdapterState& state) const;

  double loss(const VQAPair& pair, const AdapterState& state, const RankingConfig& cfg) const;

  // Adds d(loss)/d(params) of one item into `grads` and returns its losses.
  ChannelLosses accumulate(const VQAPair& pair, const AdapterState& state, const RankingConfig& cfg,
                           AdapterGrads& grads) const;

  void backward(const ItemPass& pass, const ScoreGrads& upstream, const AdapterState& state,
                AdapterGrads& grads) const;

  std::shared_ptr<const VisualFeatures> visual(const ImageRef& image) const;

  // Every non-adapter parameter the scores depend on (text + vision).
  ParamSet frozen_parameters() const;

  const ToyTextScorer& text() const noexcept { return *text_; }
  ScoringMode mode() const noexcept { return mode_; }

 private:
  std::shared_ptr<const ToyTextScorer> text_;
  std::shared_ptr<const VisualEncoder> vision_;
  ScoringMode mode_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, std::shared_ptr<const VisualFeatures>> cache_;
};

}  // namespace mmcr
