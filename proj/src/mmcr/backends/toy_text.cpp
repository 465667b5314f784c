// SPDX-License-Identifier: Apache-2.0
#include "mmcr/backends/toy_text.hpp"

#include <cmath>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

namespace {

constexpr double kBackboneGain = 2.5;

double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

void outer_add(Tensor& m, std::span<const double> col, std::span<const double> row) {
  const std::size_t cols = m.cols();
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col[i] == 0.0) continue;
    double* mr = m.values.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) mr[j] += col[i] * row[j];
  }
}

}  // namespace

ToyTextScorer::ToyTextScorer(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
  descriptor_.kind = BackendKind::TextScorer;
  descriptor_.validate();
  dim_ = static_cast<std::size_t>(descriptor_.get("feature_dim", 32));
  seed_ = static_cast<std::uint64_t>(descriptor_.get("seed", 0));
  mode_ = descriptor_.get("mode", 0) == 0 ? ScoringMode::Masked : ScoringMode::Autoregressive;
  descriptor_.config["feature_dim"] = static_cast<std::int64_t>(dim_);
  descriptor_.config["seed"] = static_cast<std::int64_t>(seed_);
  descriptor_.config["mode"] = mode_ == ScoringMode::Masked ? 0 : 1;

  mix_weight_ = Tensor::matrix(dim_, dim_);
  mix_bias_ = Tensor::vector(dim_);
  const double bound = kBackboneGain * std::sqrt(3.0 / static_cast<double>(dim_));
  SplitMix64 gen(combine(seed_, fnv1a64("text.mix")));
  for (auto& w : mix_weight_.values) w = gen.uniform(-bound, bound);
  for (auto& b : mix_bias_.values) b = gen.uniform(-0.1, 0.1);
}

ParamSet ToyTextScorer::frozen_parameters() const {
  return {{"text.mix.bias", mix_bias_}, {"text.mix.weight", mix_weight_}};
}

std::vector<double> ToyTextScorer::embedding(const std::string& token) const {
  return hashed_unit_vector(token, seed_, dim_);
}

const Tensor& ToyTextScorer::mix_weight(const AdapterState* state) const {
  if (state && !state->backbone.empty()) return state->backbone.at("text.mix.weight");
  return mix_weight_;
}

const Tensor& ToyTextScorer::mix_bias(const AdapterState* state) const {
  if (state && !state->backbone.empty()) return state->backbone.at("text.mix.bias");
  return mix_bias_;
}

ToyTextScorer::Hidden ToyTextScorer::run_hidden(std::vector<double> x, const ParamSet* adapter,
                                                const std::string& prefix, const AdapterState* state) const {
  Hidden h;
  h.x = std::move(x);
  h.h0.resize(dim_);
  matvec_add_bias(mix_weight(state), mix_bias(state), h.x, h.h0);
  for (auto& v : h.h0) v = std::tanh(v);
  h.out = h.h0;
  if (adapter != nullptr) {
    const Tensor& down = adapter->at(prefix + "down.weight");
    h.a.resize(down.rows());
    matvec_add_bias(down, adapter->at(prefix + "down.bias"), h.x, h.a);
    for (auto& v : h.a) v = std::tanh(v);
    std::vector<double> up(dim_);
    matvec_add_bias(adapter->at(prefix + "up.weight"), adapter->at(prefix + "up.bias"), h.a, up);
    for (std::size_t i = 0; i < dim_; ++i) h.out[i] += up[i];
  }
  return h;
}

ToyTextScorer::Trace ToyTextScorer::forward(const TextInput& input, ScoringMode mode,
                                            const AdapterState* adapters) const {
  require(!input.target.empty(), ErrorCode::InvalidInput, "no scoreable tokens");
  if (adapters != nullptr) {
    require(adapters->text_dim == dim_, ErrorCode::DimensionError,
            "adapter text dimension does not match the text scorer feature_dim");
  }
  const bool adapters_on = adapters != nullptr && adapters->adapters_enabled;
  const ParamSet* lm = adapters_on ? &adapters->lm : nullptr;
  const ParamSet* itm = adapters_on ? &adapters->itm : nullptr;

  // Sequence = [boundary] + context + target.
  std::vector<std::vector<double>> seq;
  seq.reserve(1 + input.context.size() + input.target.size());
  seq.push_back(embedding(mode == ScoringMode::Masked ? "<cls>" : "<bos>"));
  for (const auto& t : input.context) seq.push_back(embedding(t));
  for (const auto& t : input.target) seq.push_back(embedding(t));
  const std::size_t n = seq.size();
  const std::size_t first_target = 1 + input.context.size();

  Trace trace;
  trace.features.scoring_mode = mode;
  trace.tokens.reserve(input.target.size());

  auto score_token = [&](std::size_t j, std::vector<double> x) {
    TokenTrace tt;
    tt.hidden = run_hidden(std::move(x), lm, "lm.", adapters);
    tt.e = seq[j];
    tt.z = dot(tt.hidden.out, tt.e);
    const double lp = log_sigmoid(tt.z);
    tt.clamped = lp < kMinLogProb;
    tt.log_prob = tt.clamped ? kMinLogProb : lp;
    trace.features.token_log_probs.push_back(tt.log_prob);
    trace.tokens.push_back(std::move(tt));
  };

  std::vector<double> pooled(dim_, 0.0);
  if (mode == ScoringMode::Masked) {
    for (const auto& e : seq) {
      for (std::size_t i = 0; i < dim_; ++i) pooled[i] += e[i];
    }
    const double inv = 1.0 / std::sqrt(static_cast<double>(n - 1));
    for (std::size_t j = first_target; j < n; ++j) {
      std::vector<double> x(dim_);
      for (std::size_t i = 0; i < dim_; ++i) x[i] = (pooled[i] - seq[j][i]) * inv;
      score_token(j, std::move(x));
    }
    // Context vector: question and answer segments pooled separately and
    // mixed evenly, so a short answer is not drowned by a long question.
    const double n_ctx = static_cast<double>(first_target);
    const double n_tgt = static_cast<double>(n - first_target);
    std::vector<double> ctx_sum(dim_, 0.0);
    for (std::size_t j = 0; j < first_target; ++j) {
      for (std::size_t i = 0; i < dim_; ++i) ctx_sum[i] += seq[j][i];
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      const double tgt_sum = pooled[i] - ctx_sum[i];
      pooled[i] = (ctx_sum[i] / std::sqrt(n_ctx) + tgt_sum / std::sqrt(n_tgt)) / std::sqrt(2.0);
    }
  } else {
    double weight2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j >= first_target) {
        std::vector<double> x(dim_);
        const double inv = 1.0 / std::sqrt(weight2);
        for (std::size_t i = 0; i < dim_; ++i) x[i] = pooled[i] * inv;
        score_token(j, std::move(x));
      }
      for (std::size_t i = 0; i < dim_; ++i) pooled[i] = kDecay * pooled[i] + seq[j][i];
      weight2 = kDecay * kDecay * weight2 + 1.0;
    }
    const double inv = 1.0 / std::sqrt(weight2);
    for (auto& v : pooled) v *= inv;
  }

  trace.context = run_hidden(std::move(pooled), itm, "itm.", adapters);
  trace.features.context_vector = trace.context.out;
  return trace;
}

TextFeatures ToyTextScorer::encode(const TextInput& input, ScoringMode mode, const AdapterState* adapters) const {
  return forward(input, mode, adapters).features;
}

void ToyTextScorer::backward_hidden(const Hidden& h, std::span<const double> d_out, const ParamSet* adapter,
                                    const std::string& prefix, ParamSet* adapter_grads,
                                    const AdapterState& state, ParamSet& backbone_grads) const {
  if (adapter != nullptr && adapter_grads != nullptr && !h.a.empty()) {
    const Tensor& up = adapter->at(prefix + "up.weight");
    outer_add(adapter_grads->at(prefix + "up.weight"), d_out, h.a);
    auto& du = adapter_grads->at(prefix + "up.bias").values;
    for (std::size_t i = 0; i < dim_; ++i) du[i] += d_out[i];
    const std::size_t r = h.a.size();
    std::vector<double> dpre(r, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      if (d_out[i] == 0.0) continue;
      for (std::size_t k = 0; k < r; ++k) dpre[k] += up.at(i, k) * d_out[i];
    }
    for (std::size_t k = 0; k < r; ++k) dpre[k] *= 1.0 - h.a[k] * h.a[k];
    outer_add(adapter_grads->at(prefix + "down.weight"), dpre, h.x);
    auto& dc = adapter_grads->at(prefix + "down.bias").values;
    for (std::size_t k = 0; k < r; ++k) dc[k] += dpre[k];
  }
  if (!backbone_grads.empty()) {
    std::vector<double> dpre0(dim_);
    for (std::size_t i = 0; i < dim_; ++i) dpre0[i] = d_out[i] * (1.0 - h.h0[i] * h.h0[i]);
    outer_add(backbone_grads.at("text.mix.weight"), dpre0, h.x);
    auto& db = backbone_grads.at("text.mix.bias").values;
    for (std::size_t i = 0; i < dim_; ++i) db[i] += dpre0[i];
  }
  (void)state;
}

void ToyTextScorer::backward(const Trace& trace, std::span<const double> d_log_probs,
                             std::span<const double> d_context, const AdapterState& adapters,
                             AdapterGrads& grads) const {
  const bool on = adapters.adapters_enabled;
  const ParamSet* lm = on ? &adapters.lm : nullptr;
  const ParamSet* itm = on ? &adapters.itm : nullptr;

  std::vector<double> d_out(dim_);
  for (std::size_t t = 0; t < trace.tokens.size(); ++t) {
    const auto& tt = trace.tokens[t];
    if (tt.clamped || d_log_probs[t] == 0.0) continue;
    // d log sigmoid(z) / dz = sigmoid(-z)
    const double dz = d_log_probs[t] * sigmoid(-tt.z);
    for (std::size_t i = 0; i < dim_; ++i) d_out[i] = dz * tt.e[i];
    backward_hidden(tt.hidden, d_out, lm, "lm.", &grads.lm, adapters, grads.backbone);
  }
  if (!d_context.empty()) {
    backward_hidden(trace.context, d_context, itm, "itm.", &grads.itm, adapters, grads.backbone);
  }
}

TextFeatures stub_encode_text(const std::string& text, ScoringMode mode, std::uint64_t seed,
                              std::size_t feature_dim) {
  auto tokens = tokenize(text);
  require(!tokens.empty(), ErrorCode::InvalidInput, "stub_encode_text: empty text");
  BackendDescriptor d{BackendKind::TextScorer, "stub",
                      {{"feature_dim", static_cast<std::int64_t>(feature_dim)},
                       {"seed", static_cast<std::int64_t>(seed)},
                       {"mode", mode == ScoringMode::Masked ? 0 : 1}}};
  return ToyTextScorer(std::move(d)).encode(TextInput{{}, std::move(tokens)}, mode);
}

}  // namespace mmcr
