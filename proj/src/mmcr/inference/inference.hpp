// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmcr/dataset/image_store.hpp"
#include "mmcr/scoring/scoring.hpp"

namespace mmcr {

// Which score plays the text role in the ensemble.
enum class TextChannel { LM, Joint };
std::string to_string(TextChannel c);
TextChannel parse_text_channel(const std::string& text);

struct EnsembleConfig {
  double lambda = 0.5;  // weight of the image channel
  TextChannel text_channel = TextChannel::LM;

  void validate() const;
};

struct Prediction {
  std::string id;
  std::vector<double> probs;
  int predicted_index = -1;
  std::vector<double> p_text;
  std::vector<double> p_itm;  // empty when the image channel was skipped (lambda = 0)
  std::string error;          // non-empty for excluded items

  bool ok() const noexcept { return error.empty(); }
  OrderedJson to_json() const;
};

// Max-subtracted softmax. InvalidInput on empty or non-finite input.
std::vector<double> softmax(std::span<const double> scores);

// Index of the largest value; the lowest index wins ties.
int argmax(std::span<const double> values);

// (1 - lambda) * p_text + lambda * p_itm. The boundaries return the
// corresponding input unchanged, bit for bit.
Prediction ensemble(std::span<const double> p_text, std::span<const double> p_itm, double lambda);

// Prediction from an already computed score vector. The ITM channel is
// touched only when lambda > 0.
Prediction predict_from_scores(const std::string& id, const ScoreVector& scores, const EnsembleConfig& cfg);

struct GenerationOptions {
  std::uint32_t resolution = 384;
  std::uint32_t steps = 50;
};

// End to end: fetch or generate the image (only when lambda > 0), score,
// softmax per channel, ensemble. Failures are returned in Prediction::error.
// `store` may be null when every pair already carries an image.
Prediction predict(const VQAPair& pair, const AdapterState* adapters, const Backends& backends,
                   const EnsembleConfig& cfg, ImageStore* store = nullptr, const GenerationOptions& gen = {});

struct ScoredItem {
  std::string id;
  ScoreVector scores;
  int gold = 0;
};

// Scores every pair (images must already be attached unless text_only).
// Runs on up to `threads` workers; results keep input order.
std::vector<ScoredItem> score_items(const std::vector<VQAPair>& pairs, const Backends& backends,
                                    const AdapterState* adapters, const ScoreOptions& options = {},
                                    unsigned threads = 0);

// "lo:hi:step", inclusive of hi; values are rounded to 1e-9 so that
// 0:1:0.05 yields exactly 0.35 rather than 0.35000000000000003.
std::vector<double> parse_grid(const std::string& text);
std::vector<double> default_grid();

struct SweepResult {
  std::vector<double> grid;
  std::vector<double> accuracy;
  double best_lambda = 0.0;
  double best_accuracy = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;

  // "lambda,accuracy" rows with a header line.
  std::string to_csv() const;
  OrderedJson to_json() const;
};

// Accuracy at every grid value over items whose scores are complete; the
// best lambda is the first maximum (lowest lambda on ties).
SweepResult sweep_lambda(const std::vector<ScoredItem>& dev, std::span<const double> grid,
                         TextChannel text_channel = TextChannel::LM);

}  // namespace mmcr
