// SPDX-License-Identifier: Apache-2.0
#include "mmcr/inference/inference.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "mmcr/common/error.hpp"

namespace mmcr {

std::string to_string(TextChannel c) { return c == TextChannel::LM ? "lm" : "joint"; }

TextChannel parse_text_channel(const std::string& text) {
  if (text == "lm") return TextChannel::LM;
  if (text == "joint") return TextChannel::Joint;
  fail(ErrorCode::UsageError, "unknown text channel: " + text + " (expected lm or joint)");
}

void EnsembleConfig::validate() const {
  require(std::isfinite(lambda) && lambda >= 0.0 && lambda <= 1.0, ErrorCode::InvalidInput,
          fmt::format("lambda must lie in [0, 1], got {}", lambda));
}

OrderedJson Prediction::to_json() const {
  OrderedJson j;
  j["id"] = id;
  if (!ok()) {
    j["error"] = error;
    return j;
  }
  j["probs"] = probs;
  j["predicted_index"] = predicted_index;
  j["p_text"] = p_text;
  if (!p_itm.empty()) j["p_itm"] = p_itm;
  return j;
}

std::vector<double> softmax(std::span<const double> scores) {
  require(!scores.empty(), ErrorCode::InvalidInput, "softmax of an empty vector");
  for (double s : scores) require(std::isfinite(s), ErrorCode::InvalidInput, "softmax input is not finite");
  const double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] = std::exp(scores[i] - mx);
  for (auto& v : p) v /= total;
  return p;
}

int argmax(std::span<const double> values) {
  require(!values.empty(), ErrorCode::InvalidInput, "argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

Prediction ensemble(std::span<const double> p_text, std::span<const double> p_itm, double lambda) {
  require(p_text.size() == p_itm.size(), ErrorCode::InvalidInput,
          fmt::format("cannot ensemble distributions of length {} and {}", p_text.size(), p_itm.size()));
  EnsembleConfig{lambda}.validate();
  Prediction out;
  out.p_text.assign(p_text.begin(), p_text.end());
  out.p_itm.assign(p_itm.begin(), p_itm.end());
  if (lambda == 0.0) {
    out.probs = out.p_text;
  } else if (lambda == 1.0) {
    out.probs = out.p_itm;
  } else {
    out.probs.resize(p_text.size());
    for (std::size_t i = 0; i < p_text.size(); ++i) out.probs[i] = (1.0 - lambda) * p_text[i] + lambda * p_itm[i];
  }
  out.predicted_index = argmax(out.probs);
  return out;
}

Prediction predict_from_scores(const std::string& id, const ScoreVector& scores, const EnsembleConfig& cfg) {
  cfg.validate();
  Prediction out;
  out.id = id;
  const bool need_itm = cfg.lambda > 0.0 || cfg.text_channel == TextChannel::Joint;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    // A failed image channel is harmless when only the LM score is used.
    const std::string error = i < scores.errors.size() ? scores.errors[i] : std::string();
    const bool lm_ok = i < scores.lm_ok.size() ? static_cast<bool>(scores.lm_ok[i]) : error.empty();
    if (need_itm ? !error.empty() : !lm_ok) {
      out.error = error;
      return out;
    }
  }
  if (need_itm && !scores.itm_available) {
    out.error = "ChannelMissing: score vector has no image channel";
    return out;
  }
  try {
    const auto p_text = softmax(cfg.text_channel == TextChannel::LM ? scores.lm : scores.joint);
    if (cfg.lambda == 0.0) {
      out.p_text = p_text;
      out.probs = p_text;
      out.predicted_index = argmax(out.probs);
    } else {
      Prediction e = ensemble(p_text, softmax(scores.itm), cfg.lambda);
      e.id = id;
      return e;
    }
  } catch (const Error& e) {
    out.error = fmt::format("{}: {}", to_string(e.code()), e.what());
  }
  return out;
}

Prediction predict(const VQAPair& pair, const AdapterState* adapters, const Backends& backends,
                   const EnsembleConfig& cfg, ImageStore* store, const GenerationOptions& gen) {
  cfg.validate();
  const bool need_itm = cfg.lambda > 0.0 || cfg.text_channel == TextChannel::Joint;
  try {
    VQAPair item = pair;
    if (need_itm && !item.image) {
      require(store != nullptr, ErrorCode::MissingImage,
              "item " + pair.qa.id + " has no image and no generator store was given");
      VQAPair generated = attach_image(pair.qa, *store, gen.resolution, gen.steps);
      item.image = generated.image;
    }
    ScoreOptions options;
    options.text_only = !need_itm;
    return predict_from_scores(pair.qa.id, score_choices(item, backends, adapters, options), cfg);
  } catch (const Error& e) {
    Prediction out;
    out.id = pair.qa.id;
    out.error = fmt::format("{}: {}", to_string(e.code()), e.what());
    return out;
  }
}

std::vector<ScoredItem> score_items(const std::vector<VQAPair>& pairs, const Backends& backends,
                                    const AdapterState* adapters, const ScoreOptions& options, unsigned threads) {
  std::vector<ScoredItem> out(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      out[i].id = pairs[i].qa.id;
      out[i].gold = pairs[i].qa.answer_index;
      out[i].scores = score_choices(pairs[i], backends, adapters, options);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, pairs.size())));
  if (threads <= 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();  // joins
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  char tail = 0;
  const int n = std::sscanf(text.c_str(), "%lf%c%lf%c%lf%c", &lo, &c1, &hi, &c2, &step, &tail);
  if (n == 1) {
    require(lo >= 0.0 && lo <= 1.0, ErrorCode::UsageError, "grid value must lie in [0, 1]: " + text);
    return {lo};
  }
  require(n == 5 && c1 == ':' && c2 == ':', ErrorCode::UsageError, "grid must look like lo:hi:step, got " + text);
  require(lo >= 0.0 && hi <= 1.0 && lo <= hi && step > 0.0, ErrorCode::UsageError,
          "grid needs 0 <= lo <= hi <= 1 and step > 0: " + text);
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(std::min(hi, std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9));
  }
  return grid;
}

std::vector<double> default_grid() { return parse_grid("0:1:0.05"); }

std::string SweepResult::to_csv() const {
  std::string out = "lambda,accuracy\n";
  for (std::size_t i = 0; i < grid.size(); ++i) out += fmt::format("{},{}\n", grid[i], accuracy[i]);
  return out;
}

OrderedJson SweepResult::to_json() const {
  OrderedJson j;
  j["best_lambda"] = best_lambda;
  j["best_accuracy"] = best_accuracy;
  j["evaluated"] = evaluated;
  j["excluded"] = excluded;
  OrderedJson curve = OrderedJson::array();
  for (std::size_t i = 0; i < grid.size(); ++i) curve.push_back({{"lambda", grid[i]}, {"accuracy", accuracy[i]}});
  j["curve"] = curve;
  return j;
}

SweepResult sweep_lambda(const std::vector<ScoredItem>& dev, std::span<const double> grid, TextChannel text_channel) {
  require(!grid.empty(), ErrorCode::InvalidInput, "lambda grid is empty");
  for (double l : grid) EnsembleConfig{l}.validate();

  // Softmax once per item; only the mixing depends on lambda.
  struct Probs {
    std::vector<double> text, itm;
    int gold;
  };
  std::vector<Probs> items;
  SweepResult r;
  for (const auto& d : dev) {
    if (!d.scores.ok() || !d.scores.itm_available) {
      ++r.excluded;
      continue;
    }
    items.push_back({softmax(text_channel == TextChannel::LM ? d.scores.lm : d.scores.joint),
                     softmax(d.scores.itm), d.gold});
  }
  require(!items.empty(), ErrorCode::InvalidInput, "no scoreable dev items to sweep over");
  r.evaluated = items.size();
  r.grid.assign(grid.begin(), grid.end());
  for (double l : grid) {
    std::size_t correct = 0;
    for (const auto& it : items) correct += ensemble(it.text, it.itm, l).predicted_index == it.gold;
    r.accuracy.push_back(static_cast<double>(correct) / static_cast<double>(items.size()));
  }
  // First maximum in grid order; sorted grids make this the lowest lambda.
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.grid.size(); ++i) {
    if (r.accuracy[i] > r.accuracy[best] || (r.accuracy[i] == r.accuracy[best] && r.grid[i] < r.grid[best])) best = i;
  }
  r.best_lambda = r.grid[best];
  r.best_accuracy = r.accuracy[best];
  return r;
}

}  // namespace mmcr
