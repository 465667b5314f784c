// SPDX-License-Identifier: Apache-2.0
#include "mmcr/training/model.hpp"

#include "mmcr/common/error.hpp"

namespace mmcr {

TrainableModel::TrainableModel(const Backends& backends, ScoringMode mode)
    : text_(std::dynamic_pointer_cast<const ToyTextScorer>(backends.text)), vision_(backends.vision), mode_(mode) {
  require(text_ != nullptr, ErrorCode::InvalidInput, "training requires the built-in trainable text scorer");
  require(vision_ != nullptr, ErrorCode::InvalidInput, "training requires a visual encoder");
}

ParamSet TrainableModel::frozen_parameters() const {
  ParamSet all = text_->frozen_parameters();
  all.merge(vision_->frozen_parameters());
  return all;
}

std::shared_ptr<const VisualFeatures> TrainableModel::visual(const ImageRef& image) const {
  const std::string key = image.id + '\x1f' + image.path;
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto features = std::make_shared<const VisualFeatures>(vision_->encode(image));
  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(key, std::move(features)).first->second;
}

TrainableModel::ItemPass TrainableModel::forward(const VQAPair& pair, const AdapterState& state) const {
  require(pair.image.has_value(), ErrorCode::MissingImage, "training item " + pair.qa.id + " has no image");
  ItemPass pass;
  pass.visual = visual(*pair.image);
  const std::size_t n = pair.qa.choices.size();
  auto& sv = pass.scores;
  sv.lm.resize(n);
  sv.itm.resize(n);
  sv.joint.resize(n);
  sv.degenerate.assign(n, false);
  sv.errors.assign(n, "");
  sv.lm_ok.assign(n, true);
  const Projection proj = projection_of(&state);
  const std::string question = pair.rendered_question();
  for (std::size_t i = 0; i < n; ++i) {
    pass.traces.push_back(text_->forward(make_text_input(question, pair.qa.choices[i]), mode_, &state));
    const auto& tf = pass.traces.back().features;
    sv.lm[i] = lm_score(tf.token_log_probs);
    pass.itm.push_back(itm_score(tf.context_vector, *pass.visual, proj));
    sv.itm[i] = pass.itm.back().score;
    sv.degenerate[i] = pass.itm.back().degenerate;
    sv.joint[i] = joint_score(sv.lm[i], sv.itm[i]);
  }
  return pass;
}

double TrainableModel::loss(const VQAPair& pair, const AdapterState& state, const RankingConfig& cfg) const {
  return combined_loss(forward(pair, state).scores, pair.qa.answer_index, cfg).total;
}

void TrainableModel::backward(const ItemPass& pass, const ScoreGrads& upstream, const AdapterState& state,
                              AdapterGrads& grads) const {
  const Projection proj = projection_of(&state);
  for (std::size_t i = 0; i < pass.traces.size(); ++i) {
    const auto& trace = pass.traces[i];
    const std::size_t m = trace.features.token_log_probs.size();
    std::vector<double> d_lp(m, upstream.d_lm[i] / static_cast<double>(m));
    std::vector<double> d_ctx;
    if (upstream.d_itm[i] != 0.0) {
      ItmGrads ig = itm_backward(trace.features.context_vector, *pass.visual, proj, pass.itm[i], upstream.d_itm[i]);
      auto& dw = grads.itm.at("itm.proj.weight").values;
      auto& db = grads.itm.at("itm.proj.bias").values;
      for (std::size_t k = 0; k < dw.size(); ++k) dw[k] += ig.d_weight.values[k];
      for (std::size_t k = 0; k < db.size(); ++k) db[k] += ig.d_bias.values[k];
      d_ctx = std::move(ig.d_t);
    }
    text_->backward(trace, d_lp, d_ctx, state, grads);
  }
}

ChannelLosses TrainableModel::accumulate(const VQAPair& pair, const AdapterState& state, const RankingConfig& cfg,
                                         AdapterGrads& grads) const {
  const ItemPass pass = forward(pair, state);
  const int y = pair.qa.answer_index;
  ChannelLosses losses = combined_loss(pass.scores, y, cfg);
  backward(pass, combined_loss_grad(pass.scores, y, cfg), state, grads);
  return losses;
}

}  // namespace mmcr
