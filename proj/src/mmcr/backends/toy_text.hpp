// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmcr/backends/interfaces.hpp"
#include "mmcr/training/adapter_state.hpp"

namespace mmcr {

// Deterministic stand-in for the pretrained language model, small enough to
// train and gradient-check exhaustively.
//
// Tokens map to seeded unit vectors (hashed, so there is no vocabulary to
// store). A context is pooled into x, either bidirectionally over every other
// token (masked) or with geometric decay over the prefix (autoregressive).
// The frozen backbone produces h = tanh(W x + b); a parallel adapter adds
// U tanh(D x + c) + u. Token plausibility is log sigmoid(<g, e(w)>), clamped
// to [-20, 0].
class ToyTextScorer final : public TextScorer {
 public:
  static constexpr double kDecay = 0.8;
  static constexpr double kMinLogProb = -20.0;

  explicit ToyTextScorer(BackendDescriptor descriptor);

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::size_t feature_dim() const override { return dim_; }
  ScoringMode default_mode() const override { return mode_; }
  TextFeatures encode(const TextInput& input, ScoringMode mode,
                      const AdapterState* adapters = nullptr) const override;
  ParamSet frozen_parameters() const override;

  std::vector<double> embedding(const std::string& token) const;

  struct Hidden {
    std::vector<double> x;       // pooled input
    std::vector<double> h0;      // backbone tanh output
    std::vector<double> a;       // adapter bottleneck activation (empty if inactive)
    std::vector<double> out;     // h0 + adapter
  };
  struct TokenTrace {
    Hidden hidden;
    std::vector<double> e;
    double z = 0.0;
    double log_prob = 0.0;
    bool clamped = false;
  };
  struct Trace {
    std::vector<TokenTrace> tokens;
    Hidden context;
    TextFeatures features;
  };

  Trace forward(const TextInput& input, ScoringMode mode, const AdapterState* adapters) const;

  // Accumulates parameter gradients given d(objective)/d(token log-probs) and
  // d(objective)/d(context vector). Log-prob gradients reach only the LM
  // adapter, context gradients only the ITM adapter; the backbone receives
  // gradient only when `grads.backbone` is non-empty (full fine-tuning).
  void backward(const Trace& trace, std::span<const double> d_log_probs, std::span<const double> d_context,
                const AdapterState& adapters, AdapterGrads& grads) const;

 private:
  Hidden run_hidden(std::vector<double> x, const ParamSet* adapter, const std::string& prefix,
                    const AdapterState* state) const;
  void backward_hidden(const Hidden& h, std::span<const double> d_out, const ParamSet* adapter,
                       const std::string& prefix, ParamSet* adapter_grads, const AdapterState& state,
                       ParamSet& backbone_grads) const;
  const Tensor& mix_weight(const AdapterState* state) const;
  const Tensor& mix_bias(const AdapterState* state) const;

  BackendDescriptor descriptor_;
  std::size_t dim_;
  std::uint64_t seed_;
  ScoringMode mode_;
  Tensor mix_weight_;
  Tensor mix_bias_;
};

// Backbone-only features of a raw text; a pure function of (text, mode, seed).
TextFeatures stub_encode_text(const std::string& text, ScoringMode mode, std::uint64_t seed,
                              std::size_t feature_dim = 32);

}  // namespace mmcr
