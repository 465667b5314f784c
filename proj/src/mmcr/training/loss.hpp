// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "mmcr/scoring/scoring.hpp"

namespace mmcr {

enum class Channel { LM = 0, ITM = 1, Joint = 2 };
std::string to_string(Channel c);
Channel parse_channel(const std::string& text);

struct RankingConfig {
  double margin = 1.0;
  std::vector<Channel> channels{Channel::LM, Channel::ITM, Channel::Joint};
  std::array<double, 3> weights{1.0, 1.0, 1.0};  // per channel, indexed by Channel

  void validate() const;
};

// (1/n) sum_{i != y} max(0, margin - s_y + s_i).
double ranking_loss(std::span<const double> scores, int y, double margin);

// Subgradient of ranking_loss; the hinge at exactly zero contributes 0.
std::vector<double> ranking_loss_grad(std::span<const double> scores, int y, double margin);

struct ChannelLosses {
  std::array<double, 3> per_channel{0.0, 0.0, 0.0};  // unweighted, indexed by Channel
  double total = 0.0;                                // weighted sum over configured channels
};

// Sum of the ranking losses of the configured channels. A score vector
// without an ITM channel raises ChannelMissing when ITM or Joint is used.
ChannelLosses combined_loss(const ScoreVector& scores, int y, const RankingConfig& cfg);
double combined_loss(const ScoreVector& scores, int y, double margin);

// d(total)/d(lm_i) and d(total)/d(itm_i); the joint channel splits evenly
// into both.
struct ScoreGrads {
  std::vector<double> d_lm;
  std::vector<double> d_itm;
};
ScoreGrads combined_loss_grad(const ScoreVector& scores, int y, const RankingConfig& cfg);

}  // namespace mmcr
