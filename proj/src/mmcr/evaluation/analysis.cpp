// SPDX-License-Identifier: Apache-2.0
#include "mmcr/evaluation/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

#include "mmcr/backends/stub_image.hpp"
#include "mmcr/common/error.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

std::string to_string(FlipKind kind) {
  switch (kind) {
    case FlipKind::Helpful: return "helpful";
    case FlipKind::Harmful: return "harmful";
    case FlipKind::Neutral: return "neutral";
  }
  return "neutral";
}

OrderedJson AnalysisReport::row_json() const {
  OrderedJson j;
  j["benchmark"] = benchmark;
  j["lambda"] = lambda;
  j["evaluated"] = evaluated;
  j["helpful_pct"] = helpful_pct;
  j["harmful_pct"] = harmful_pct;
  j["helpful"] = helpful;
  j["harmful"] = harmful;
  j["neutral"] = neutral;
  j["excluded_count"] = excluded_count;
  j["accuracy"] = accuracy;
  j["text_only_accuracy"] = text_only_accuracy;
  return j;
}

OrderedJson AnalysisReport::to_json() const {
  OrderedJson j = row_json();
  OrderedJson items = OrderedJson::array();
  for (const auto& f : flips) {
    items.push_back({{"id", f.id},
                     {"gold", f.gold},
                     {"text_only", f.text_only},
                     {"ensembled", f.ensembled},
                     {"kind", to_string(f.kind)}});
  }
  j["flips"] = items;
  return j;
}

AnalysisReport helpful_harmful(const std::vector<ScoredItem>& items, double lambda, TextChannel text_channel,
                               const std::string& benchmark) {
  require(lambda > 0.0, ErrorCode::InvalidInput, "helpful/harmful analysis needs lambda > 0");
  const EnsembleConfig base{0.0, text_channel};
  const EnsembleConfig mixed{lambda, text_channel};
  mixed.validate();

  AnalysisReport r;
  r.benchmark = benchmark;
  r.lambda = lambda;
  std::size_t correct = 0, text_correct = 0;
  for (const auto& item : items) {
    const Prediction a = predict_from_scores(item.id, item.scores, base);
    const Prediction b = predict_from_scores(item.id, item.scores, mixed);
    if (!a.ok() || !b.ok()) {
      ++r.excluded_count;
      continue;
    }
    FlipRecord f{item.id, item.gold, a.predicted_index, b.predicted_index, FlipKind::Neutral};
    const bool was = f.text_only == f.gold;
    const bool now = f.ensembled == f.gold;
    if (!was && now) {
      f.kind = FlipKind::Helpful;
      ++r.helpful;
    } else if (was && !now) {
      f.kind = FlipKind::Harmful;
      ++r.harmful;
    } else {
      ++r.neutral;
    }
    correct += now;
    text_correct += was;
    r.flips.push_back(std::move(f));
  }
  r.evaluated = r.flips.size();
  require(r.evaluated > 0, ErrorCode::InvalidInput, "no evaluable items for helpful/harmful analysis");
  const auto n = static_cast<double>(r.evaluated);
  r.helpful_pct = 100.0 * static_cast<double>(r.helpful) / n;
  r.harmful_pct = 100.0 * static_cast<double>(r.harmful) / n;
  r.accuracy = static_cast<double>(correct) / n;
  r.text_only_accuracy = static_cast<double>(text_correct) / n;
  return r;
}

AnalysisReport helpful_harmful(const std::vector<VQAPair>& pairs, const AdapterState* adapters,
                               const Backends& backends, double lambda, const std::string& benchmark) {
  return helpful_harmful(score_items(pairs, backends, adapters), lambda, TextChannel::LM, benchmark);
}

OrderedJson helpful_harmful_table(const std::vector<AnalysisReport>& rows) {
  OrderedJson j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "helpful-harmful";
  OrderedJson arr = OrderedJson::array();
  for (const auto& r : rows) arr.push_back(r.row_json());
  j["rows"] = arr;
  return j;
}

double relevance(std::span<const double> a, std::span<const double> b) {
  return 100.0 * std::max(0.0, cosine(a, b));
}

double relevance_score(const std::string& text, const ImageRef& image, const Backends& backends,
                       const AdapterState* adapters) {
  require(backends.text && backends.vision, ErrorCode::InvalidInput, "relevance needs text and vision backends");
  auto tokens = tokenize(text);
  require(!tokens.empty(), ErrorCode::InvalidInput, "relevance of an empty text");
  const TextFeatures tf =
      backends.text->encode(TextInput{{}, std::move(tokens)}, backends.text->default_mode(), adapters);
  const VisualFeatures v = backends.vision->encode(image);
  const Contextualized ctx = contextualize(tf.context_vector, v, projection_of(adapters));
  return relevance(tf.context_vector, ctx.c);
}

OrderedJson RelevanceReport::to_json() const {
  OrderedJson j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "relevance";
  j["dataset"] = dataset;
  j["mean_relevance"] = mean_relevance;
  j["evaluated"] = evaluated;
  j["excluded_count"] = excluded_count;
  OrderedJson s = OrderedJson::array();
  for (const auto& d : scorer) s.push_back(d.to_spec());
  j["scorer"] = s;
  OrderedJson arr = OrderedJson::array();
  for (const auto& [id, value] : items) arr.push_back({{"id", id}, {"relevance", value}});
  j["items"] = arr;
  return j;
}

RelevanceReport relevance_report(const std::vector<VQAPair>& pairs, const Backends& backends,
                                 const AdapterState* adapters, const std::string& dataset) {
  RelevanceReport r;
  r.dataset = dataset;
  if (backends.text) r.scorer.push_back(backends.text->descriptor());
  if (backends.vision) r.scorer.push_back(backends.vision->descriptor());
  double sum = 0.0;
  for (const auto& p : pairs) {
    try {
      require(p.image.has_value(), ErrorCode::MissingImage, "item " + p.qa.id + " has no image");
      const double value = relevance_score(p.rendered_question(), *p.image, backends, adapters);
      r.items.emplace_back(p.qa.id, value);
      sum += value;
    } catch (const Error&) {
      ++r.excluded_count;
    }
  }
  r.evaluated = r.items.size();
  require(r.evaluated > 0, ErrorCode::InvalidInput, "no item could be scored for relevance");
  r.mean_relevance = sum / static_cast<double>(r.evaluated);
  return r;
}

OrderedJson ErasureResult::to_json() const {
  OrderedJson j;
  j["schema_version"] = kReportSchemaVersion;
  j["grid"] = {attention.rows, attention.cols};
  j["erase_count"] = erased.size();
  j["weights"] = attention.weights;
  j["erased"] = erased;
  j["surviving"] = surviving;
  j["image"] = image_path.filename().string();
  j["original"] = original_path.filename().string();
  return j;
}

std::vector<std::size_t> erasure_order(const AttentionMap& attention) {
  std::vector<std::size_t> order(attention.weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return attention.weights[a] < attention.weights[b];
  });
  return order;
}

ErasureResult attention_erasure(const VQAPair& pair, const AdapterState* adapters, const Backends& backends,
                                std::size_t erase_count, const fs::path& out_dir) {
  require(backends.text && backends.vision, ErrorCode::InvalidInput, "attention erasure needs text and vision");
  require(pair.image.has_value(), ErrorCode::MissingImage, "item " + pair.qa.id + " has no image");
  validate(pair.qa);
  const VisualFeatures v = backends.vision->encode(*pair.image);
  const std::size_t p = v.patch_count();
  require(erase_count < p, ErrorCode::InvalidInput,
          fmt::format("cannot erase {} of {} patches; at least one must survive", erase_count, p));

  const auto& gold = pair.qa.choices[static_cast<std::size_t>(pair.qa.answer_index)];
  const TextFeatures tf = backends.text->encode(make_text_input(pair.rendered_question(), gold),
                                                backends.text->default_mode(), adapters);
  ErasureResult r;
  r.attention = contextualize(tf.context_vector, v, projection_of(adapters)).attention;

  const auto order = erasure_order(r.attention);
  r.erased.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(erase_count));
  r.surviving.assign(order.begin() + static_cast<std::ptrdiff_t>(erase_count), order.end());
  std::sort(r.erased.begin(), r.erased.end());
  std::sort(r.surviving.begin(), r.surviving.end());

  const auto seed = static_cast<std::uint64_t>(backends.vision->descriptor().get("seed", 0));
  const Raster original = load_raster(*pair.image, seed, kDefaultRasterSize);
  Raster masked = original;
  for (std::size_t idx : r.erased) {
    const std::size_t row = idx / v.cols;
    const std::size_t col = idx % v.cols;
    const std::size_t y0 = row * masked.height / v.rows, y1 = (row + 1) * masked.height / v.rows;
    const std::size_t x0 = col * masked.width / v.cols, x1 = (col + 1) * masked.width / v.cols;
    for (std::size_t y = y0; y < y1; ++y) {
      std::fill_n(masked.pixels.begin() + static_cast<std::ptrdiff_t>(y * masked.width + x0), x1 - x0, 0);
    }
  }

  fs::create_directories(out_dir);
  r.image_path = out_dir / (pair.qa.id + "_erased.png");
  r.original_path = out_dir / (pair.qa.id + "_original.png");
  r.sidecar_path = out_dir / (pair.qa.id + "_attention.json");
  write_png(r.image_path, masked);
  write_png(r.original_path, original);
  OrderedJson side = r.to_json();
  side["id"] = pair.qa.id;
  side["image_id"] = pair.image->id;
  write_file_atomic(r.sidecar_path, pretty_json(side));
  return r;
}

}  // namespace mmcr
