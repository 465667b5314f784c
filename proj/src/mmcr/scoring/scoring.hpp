// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmcr/backends/interfaces.hpp"
#include "mmcr/dataset/types.hpp"
#include "mmcr/training/adapter_state.hpp"

namespace mmcr {

// Scores are higher-is-better throughout: the LM score is the mean token
// log-likelihood (never the negative-log-likelihood loss).

// (1/m) sum of log-probabilities. InvalidInput when m = 0.
double lm_score(std::span<const double> token_log_probs);

struct AttentionMap {
  std::vector<double> weights;  // softmax over patches
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Affine d_v -> d_t map applied to every patch. A null weight means
// identity, which is only legal when d_v == d_t.
struct Projection {
  const Tensor* weight = nullptr;  // d_t x d_v
  const Tensor* bias = nullptr;    // d_t
};

Projection projection_of(const AdapterState* adapters);

struct Contextualized {
  std::vector<double> c;          // d_t
  AttentionMap attention;
  std::vector<double> projected;  // p x d_t, row-major
};

// attention_i = softmax_i(<t, z_i> / sqrt(d_t)), z_i = P v_i + b; c = sum_i attention_i z_i.
Contextualized contextualize(std::span<const double> t_vec, const VisualFeatures& v, const Projection& proj);

// Cosine similarity; 0 (with *degenerate set) when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b, bool* degenerate = nullptr);

struct ItmResult {
  double score = 0.0;
  bool degenerate = false;
  Contextualized context;
};

ItmResult itm_score(std::span<const double> t_vec, const VisualFeatures& v, const Projection& proj);

inline double joint_score(double lm, double itm) { return 0.5 * (lm + itm); }

// Gradients of the ITM score w.r.t. its inputs.
struct ItmGrads {
  std::vector<double> d_t;
  Tensor d_weight;  // empty when the projection is the identity
  Tensor d_bias;
};

// Back-propagates `upstream` = d(objective)/d(itm score). Returns zeros when
// the forward pass was degenerate.
ItmGrads itm_backward(std::span<const double> t_vec, const VisualFeatures& v, const Projection& proj,
                      const ItmResult& forward, double upstream);

struct ScoreVector {
  std::vector<double> lm;
  std::vector<double> itm;
  std::vector<double> joint;
  bool itm_available = true;        // false in text-only mode
  std::vector<bool> degenerate;     // per choice: zero-norm ITM input
  std::vector<std::string> errors;  // per choice; empty string when fine
  std::vector<bool> lm_ok;          // per choice: LM score computed (even if ITM failed)

  std::size_t size() const noexcept { return lm.size(); }
  bool ok() const;
};

struct ScoreOptions {
  std::optional<ScoringMode> mode;  // backend default when absent
  bool text_only = false;           // skip the image channel entirely
};

// Tokenizes "rendered question" + choice, scores the choice tokens (LM) and
// matches the choice-conditioned context vector against the pair's image
// (ITM). Backend failures are recorded per choice instead of thrown.
ScoreVector score_choices(const VQAPair& pair, const Backends& backends, const AdapterState* adapters,
                          const ScoreOptions& options = {});

TextInput make_text_input(const std::string& question, const std::string& choice);

}  // namespace mmcr
