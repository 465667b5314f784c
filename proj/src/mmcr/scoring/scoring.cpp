// SPDX-License-Identifier: Apache-2.0
#include "mmcr/scoring/scoring.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "mmcr/common/error.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

double lm_score(std::span<const double> token_log_probs) {
  require(!token_log_probs.empty(), ErrorCode::InvalidInput, "no scoreable tokens");
  double sum = 0.0;
  for (double lp : token_log_probs) sum += lp;
  return sum / static_cast<double>(token_log_probs.size());
}

Projection projection_of(const AdapterState* adapters) {
  if (adapters == nullptr) return {};
  return {&adapters->itm.at("itm.proj.weight"), &adapters->itm.at("itm.proj.bias")};
}

Contextualized contextualize(std::span<const double> t_vec, const VisualFeatures& v, const Projection& proj) {
  const std::size_t p = v.patch_count();
  require(p >= 1 && v.patches.size() == p * v.dim, ErrorCode::InvalidInput, "visual features have no patches");
  const std::size_t d = t_vec.size();
  if (proj.weight == nullptr) {
    require(v.dim == d, ErrorCode::DimensionError,
            fmt::format("visual dim {} != text dim {} and no projection given", v.dim, d));
  } else {
    require(proj.weight->rows() == d && proj.weight->cols() == v.dim, ErrorCode::DimensionError,
            fmt::format("projection is {}x{}, expected {}x{}", proj.weight->rows(), proj.weight->cols(), d, v.dim));
    require(proj.bias == nullptr || proj.bias->size() == d, ErrorCode::DimensionError, "projection bias size");
  }

  Contextualized out;
  out.attention.rows = v.rows;
  out.attention.cols = v.cols;
  out.projected.resize(p * d);
  std::vector<double> logits(p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < p; ++i) {
    std::span<double> z(out.projected.data() + i * d, d);
    if (proj.weight == nullptr) {
      std::copy(v.patch(i).begin(), v.patch(i).end(), z.begin());
    } else if (proj.bias != nullptr) {
      matvec_add_bias(*proj.weight, *proj.bias, v.patch(i), z);
    } else {
      matvec(*proj.weight, v.patch(i), z);
    }
    logits[i] = dot(t_vec, z) * scale;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  out.attention.weights.resize(p);
  for (std::size_t i = 0; i < p; ++i) total += out.attention.weights[i] = std::exp(logits[i] - mx);
  for (auto& w : out.attention.weights) w /= total;

  out.c.assign(d, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    const double a = out.attention.weights[i];
    const double* z = out.projected.data() + i * d;
    for (std::size_t k = 0; k < d; ++k) out.c[k] += a * z[k];
  }
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b, bool* degenerate) {
  require(a.size() == b.size(), ErrorCode::DimensionError, "cosine of vectors with different lengths");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  if (degenerate) *degenerate = false;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

ItmResult itm_score(std::span<const double> t_vec, const VisualFeatures& v, const Projection& proj) {
  ItmResult r;
  r.context = contextualize(t_vec, v, proj);
  r.score = cosine(t_vec, r.context.c, &r.degenerate);
  return r;
}

ItmGrads itm_backward(std::span<const double> t_vec, const VisualFeatures& v, const Projection& proj,
                      const ItmResult& fwd, double upstream) {
  const std::size_t d = t_vec.size();
  const std::size_t p = v.patch_count();
  ItmGrads g;
  g.d_t.assign(d, 0.0);
  if (proj.weight != nullptr) {
    g.d_weight = Tensor::matrix(d, v.dim);
    g.d_bias = Tensor::vector(d);
  }
  if (fwd.degenerate || upstream == 0.0) return g;

  const auto& c = fwd.context.c;
  const double nt = norm(t_vec);
  const double nc = norm(c);
  // Unclamped cosine: the clamp only trims rounding past +-1.
  const double s = dot(t_vec, c) / (nt * nc);
  std::vector<double> gc(d);
  for (std::size_t k = 0; k < d; ++k) {
    g.d_t[k] = upstream * (c[k] / (nt * nc) - s * t_vec[k] / (nt * nt));
    gc[k] = upstream * (t_vec[k] / (nt * nc) - s * c[k] / (nc * nc));
  }

  const auto& a = fwd.context.attention.weights;
  std::vector<double> ga(p);
  double mean_ga = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    ga[i] = dot(gc, std::span<const double>(fwd.context.projected.data() + i * d, d));
    mean_ga += a[i] * ga[i];
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> dz(d);
  for (std::size_t i = 0; i < p; ++i) {
    const double gl = a[i] * (ga[i] - mean_ga) * scale;  // d/d<t, z_i>
    const double* z = fwd.context.projected.data() + i * d;
    for (std::size_t k = 0; k < d; ++k) {
      g.d_t[k] += gl * z[k];
      dz[k] = a[i] * gc[k] + gl * t_vec[k];
    }
    if (proj.weight != nullptr) {
      const auto patch = v.patch(i);
      for (std::size_t k = 0; k < d; ++k) {
        if (dz[k] == 0.0) continue;
        double* row = g.d_weight.values.data() + k * v.dim;
        for (std::size_t j = 0; j < v.dim; ++j) row[j] += dz[k] * patch[j];
        g.d_bias.values[k] += dz[k];
      }
    }
  }
  return g;
}

bool ScoreVector::ok() const {
  return std::all_of(errors.begin(), errors.end(), [](const std::string& e) { return e.empty(); });
}

TextInput make_text_input(const std::string& question, const std::string& choice) {
  return TextInput{tokenize(question), tokenize(choice)};
}

ScoreVector score_choices(const VQAPair& pair, const Backends& backends, const AdapterState* adapters,
                          const ScoreOptions& options) {
  require(backends.text != nullptr, ErrorCode::InvalidInput, "no text scorer configured");
  const std::size_t n = pair.qa.choices.size();
  const ScoringMode mode = options.mode.value_or(backends.text->default_mode());
  ScoreVector sv;
  sv.lm.assign(n, 0.0);
  sv.itm.assign(n, 0.0);
  sv.joint.assign(n, 0.0);
  sv.degenerate.assign(n, false);
  sv.errors.assign(n, "");
  sv.lm_ok.assign(n, false);
  sv.itm_available = !options.text_only;

  std::optional<VisualFeatures> visual;
  std::string image_error;
  if (sv.itm_available) {
    try {
      require(backends.vision != nullptr, ErrorCode::InvalidInput, "no visual encoder configured");
      require(pair.image.has_value(), ErrorCode::MissingImage, "item " + pair.qa.id + " has no image");
      visual = backends.vision->encode(*pair.image);
    } catch (const Error& e) {
      image_error = fmt::format("{}: {}", to_string(e.code()), e.what());
    }
  }
  const Projection proj = projection_of(adapters);
  const std::string question = pair.rendered_question();

  for (std::size_t i = 0; i < n; ++i) {
    try {
      const TextFeatures tf = backends.text->encode(make_text_input(question, pair.qa.choices[i]), mode, adapters);
      sv.lm[i] = lm_score(tf.token_log_probs);
      sv.lm_ok[i] = true;
      if (sv.itm_available) {
        if (!image_error.empty()) {
          sv.errors[i] = image_error;
          continue;
        }
        const ItmResult r = itm_score(tf.context_vector, *visual, proj);
        sv.itm[i] = r.score;
        sv.degenerate[i] = r.degenerate;
      }
      sv.joint[i] = joint_score(sv.lm[i], sv.itm[i]);
    } catch (const Error& e) {
      sv.errors[i] = fmt::format("{}: {}", to_string(e.code()), e.what());
    }
  }
  return sv;
}

}  // namespace mmcr
