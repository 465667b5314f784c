// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mmcr/training/model.hpp"

namespace mmcr {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;  // "name[index]"
  std::size_t checked = 0;      // entries with |gradient| > threshold
  std::size_t total = 0;
};

// Smallest |margin - s_y + s_i| over the configured channels; items closer
// than ~1e-4 to a hinge kink make finite differences meaningless.
double hinge_clearance(const ScoreVector& scores, int y, const RankingConfig& cfg);

// Compares the analytic gradient of the combined loss with central finite
// differences (step eps) for every trainable entry. Relative error is
// |a - f| / max(|a|, |f|), taken over entries where max(|a|, |f|) > threshold.
GradientCheckResult gradient_check(const TrainableModel& model, const VQAPair& item, const AdapterState& state,
                                   double eps, const RankingConfig& cfg = {}, double threshold = 1e-8);

}  // namespace mmcr
