// SPDX-License-Identifier: Apache-2.0
#include "mmcr/training/loss.hpp"

#include <fmt/format.h>

#include "mmcr/common/error.hpp"

namespace mmcr {

namespace {

void check_ranking_args(std::span<const double> scores, int y) {
  require(scores.size() >= 2, ErrorCode::InvalidInput, "ranking loss needs at least two scores");
  require(y >= 0 && static_cast<std::size_t>(y) < scores.size(), ErrorCode::InvalidInput,
          fmt::format("gold index {} out of range for {} choices", y, scores.size()));
}

const std::vector<double>& channel_scores(const ScoreVector& sv, Channel c) {
  switch (c) {
    case Channel::LM: return sv.lm;
    case Channel::ITM: return sv.itm;
    case Channel::Joint: return sv.joint;
  }
  return sv.lm;
}

}  // namespace

std::string to_string(Channel c) {
  switch (c) {
    case Channel::LM: return "lm";
    case Channel::ITM: return "itm";
    case Channel::Joint: return "joint";
  }
  return "unknown";
}

Channel parse_channel(const std::string& text) {
  if (text == "lm") return Channel::LM;
  if (text == "itm") return Channel::ITM;
  if (text == "joint") return Channel::Joint;
  fail(ErrorCode::UsageError, "unknown channel: " + text + " (expected lm, itm or joint)");
}

void RankingConfig::validate() const {
  require(margin > 0.0, ErrorCode::InvalidInput, "margin must be positive");
  require(!channels.empty(), ErrorCode::InvalidInput, "at least one loss channel is required");
}

double ranking_loss(std::span<const double> scores, int y, double margin) {
  check_ranking_args(scores, y);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (static_cast<int>(i) == y) continue;
    sum += std::max(0.0, margin - scores[static_cast<std::size_t>(y)] + scores[i]);
  }
  return sum / static_cast<double>(scores.size());
}

std::vector<double> ranking_loss_grad(std::span<const double> scores, int y, double margin) {
  check_ranking_args(scores, y);
  const double inv_n = 1.0 / static_cast<double>(scores.size());
  std::vector<double> g(scores.size(), 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (static_cast<int>(i) == y) continue;
    if (margin - scores[static_cast<std::size_t>(y)] + scores[i] > 0.0) {
      g[i] += inv_n;
      g[static_cast<std::size_t>(y)] -= inv_n;
    }
  }
  return g;
}

ChannelLosses combined_loss(const ScoreVector& scores, int y, const RankingConfig& cfg) {
  cfg.validate();
  ChannelLosses out;
  for (Channel c : cfg.channels) {
    if (c != Channel::LM && !scores.itm_available) {
      fail(ErrorCode::ChannelMissing, "score vector has no image channel; cannot compute the " + to_string(c) +
                                          " ranking loss");
    }
    const auto idx = static_cast<std::size_t>(c);
    out.per_channel[idx] = ranking_loss(channel_scores(scores, c), y, cfg.margin);
    out.total += cfg.weights[idx] * out.per_channel[idx];
  }
  return out;
}

double combined_loss(const ScoreVector& scores, int y, double margin) {
  RankingConfig cfg;
  cfg.margin = margin;
  return combined_loss(scores, y, cfg).total;
}

ScoreGrads combined_loss_grad(const ScoreVector& scores, int y, const RankingConfig& cfg) {
  const std::size_t n = scores.size();
  ScoreGrads g{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (Channel c : cfg.channels) {
    if (c != Channel::LM && !scores.itm_available) {
      fail(ErrorCode::ChannelMissing, "score vector has no image channel");
    }
    const double w = cfg.weights[static_cast<std::size_t>(c)];
    const auto gc = ranking_loss_grad(channel_scores(scores, c), y, cfg.margin);
    for (std::size_t i = 0; i < n; ++i) {
      switch (c) {
        case Channel::LM: g.d_lm[i] += w * gc[i]; break;
        case Channel::ITM: g.d_itm[i] += w * gc[i]; break;
        case Channel::Joint:
          g.d_lm[i] += 0.5 * w * gc[i];
          g.d_itm[i] += 0.5 * w * gc[i];
          break;
      }
    }
  }
  return g;
}

}  // namespace mmcr
