// SPDX-License-Identifier: Apache-2.0
#include "mmcr/training/gradient_check.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmcr/common/error.hpp"

namespace mmcr {

namespace {

using Real = long double;

// Independent re-evaluation of the combined loss in extended precision. A
// double-precision loss near 1 carries ~1e-16 of rounding noise, which after
// dividing by 2*eps swamps gradients below ~1e-5; the long double path keeps
// the finite differences meaningful down to the 1e-8 reporting threshold.
// Parameter-independent inputs (pooled token inputs, target embeddings,
// visual patches) are taken from one double forward pass.
class ReferenceLoss {
 public:
  ReferenceLoss(const TrainableModel& model, const VQAPair& item, const AdapterState& state,
                const RankingConfig& cfg)
      : cfg_(cfg), y_(static_cast<std::size_t>(item.qa.answer_index)), frozen_(model.text().frozen_parameters()) {
    const auto pass = model.forward(item, state);
    visual_ = pass.visual;
    projected_.assign(visual_->patch_count(), std::vector<Real>(state.text_dim));
    for (std::size_t r = 0; r < state.text_dim; ++r) refresh_projection_row(state, r);
    for (const auto& trace : pass.traces) {
      Choice c;
      for (const auto& tt : trace.tokens) c.tokens.push_back({tt.hidden.x, tt.e});
      c.context_x = trace.context.x;
      choices_.push_back(std::move(c));
    }
  }

  Real operator()(const AdapterState& s) {
    const std::size_t n = choices_.size();
    std::vector<Real> lm(n), itm(n), joint(n);
    for (std::size_t i = 0; i < n; ++i) {
      Real sum = 0;
      for (const auto& [x, e] : choices_[i].tokens) {
        const auto h = hidden(s, x, "lm.");
        Real z = 0;
        for (std::size_t k = 0; k < h.size(); ++k) z += h[k] * static_cast<Real>(e[k]);
        const Real lp = z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
        sum += std::max(lp, static_cast<Real>(ToyTextScorer::kMinLogProb));
      }
      lm[i] = sum / static_cast<Real>(choices_[i].tokens.size());
      itm[i] = itm_score(hidden(s, choices_[i].context_x, "itm."));
      joint[i] = (lm[i] + itm[i]) / 2;
    }
    Real total = 0;
    for (Channel c : cfg_.channels) {
      const auto& sc = c == Channel::LM ? lm : c == Channel::ITM ? itm : joint;
      Real loss = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != y_) loss += std::max(Real{0}, static_cast<Real>(cfg_.margin) - sc[y_] + sc[i]);
      }
      total += static_cast<Real>(cfg_.weights[static_cast<std::size_t>(c)]) * loss / static_cast<Real>(n);
    }
    return total;
  }

  // Projected patches are cached; perturbing projection row r must refresh it.
  void refresh_projection_row(const AdapterState& s, std::size_t r) {
    const Tensor& w = s.itm.at("itm.proj.weight");
    const Tensor& b = s.itm.at("itm.proj.bias");
    for (std::size_t i = 0; i < projected_.size(); ++i) {
      const auto patch = visual_->patch(i);
      Real acc = b.values[r];
      for (std::size_t c = 0; c < w.cols(); ++c) acc += static_cast<Real>(w.at(r, c)) * patch[c];
      projected_[i][r] = acc;
    }
  }

 private:
  struct Choice {
    std::vector<std::pair<std::vector<double>, std::vector<double>>> tokens;  // (pooled x, target embedding)
    std::vector<double> context_x;
  };

  static std::vector<Real> affine(const Tensor& w, const Tensor& b, std::span<const double> x) {
    std::vector<Real> out(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      Real acc = b.values[r];
      for (std::size_t c = 0; c < w.cols(); ++c) acc += static_cast<Real>(w.at(r, c)) * x[c];
      out[r] = acc;
    }
    return out;
  }

  std::vector<Real> hidden(const AdapterState& s, const std::vector<double>& x, const std::string& prefix) const {
    const ParamSet& bb = s.backbone.empty() ? frozen_ : s.backbone;
    auto h = affine(bb.at("text.mix.weight"), bb.at("text.mix.bias"), x);
    for (auto& v : h) v = std::tanh(v);
    if (!s.adapters_enabled) return h;
    const ParamSet& p = prefix == "lm." ? s.lm : s.itm;
    auto a = affine(p.at(prefix + "down.weight"), p.at(prefix + "down.bias"), x);
    for (auto& v : a) v = std::tanh(v);
    const Tensor& up = p.at(prefix + "up.weight");
    const Tensor& ub = p.at(prefix + "up.bias");
    for (std::size_t r = 0; r < h.size(); ++r) {
      Real acc = ub.values[r];
      for (std::size_t k = 0; k < a.size(); ++k) acc += static_cast<Real>(up.at(r, k)) * a[k];
      h[r] += acc;
    }
    return h;
  }

  Real itm_score(const std::vector<Real>& t) const {
    const std::size_t d = t.size();
    const Real scale = 1 / std::sqrt(static_cast<Real>(d));
    std::vector<Real> logits(projected_.size());
    for (std::size_t i = 0; i < projected_.size(); ++i) {
      Real acc = 0;
      for (std::size_t k = 0; k < d; ++k) acc += t[k] * projected_[i][k];
      logits[i] = acc * scale;
    }
    const Real mx = *std::max_element(logits.begin(), logits.end());
    Real total = 0;
    for (auto& l : logits) total += l = std::exp(l - mx);
    std::vector<Real> c(d, 0);
    for (std::size_t i = 0; i < projected_.size(); ++i) {
      for (std::size_t k = 0; k < d; ++k) c[k] += logits[i] / total * projected_[i][k];
    }
    Real tc = 0, tt = 0, cc = 0;
    for (std::size_t k = 0; k < d; ++k) {
      tc += t[k] * c[k];
      tt += t[k] * t[k];
      cc += c[k] * c[k];
    }
    if (tt == 0 || cc == 0) return 0;
    return tc / std::sqrt(tt * cc);
  }

  RankingConfig cfg_;
  std::size_t y_;
  ParamSet frozen_;
  std::shared_ptr<const VisualFeatures> visual_;
  std::vector<Choice> choices_;
  std::vector<std::vector<Real>> projected_;
};

}  // namespace

double hinge_clearance(const ScoreVector& scores, int y, const RankingConfig& cfg) {
  double best = std::numeric_limits<double>::infinity();
  for (Channel c : cfg.channels) {
    const auto& s = c == Channel::LM ? scores.lm : c == Channel::ITM ? scores.itm : scores.joint;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) == y) continue;
      best = std::min(best, std::abs(cfg.margin - s[static_cast<std::size_t>(y)] + s[i]));
    }
  }
  return best;
}

GradientCheckResult gradient_check(const TrainableModel& model, const VQAPair& item, const AdapterState& state,
                                   double eps, const RankingConfig& cfg, double threshold) {
  require(eps >= 1e-6 && eps <= 1e-3, ErrorCode::InvalidInput, "finite-difference step must lie in [1e-6, 1e-3]");
  require(state.trainable_count() <= 5000, ErrorCode::InvalidInput,
          fmt::format("gradient check is limited to 5000 parameters (state has {})", state.trainable_count()));

  AdapterGrads analytic = AdapterGrads::zeros_for(state, state.backbone);
  model.accumulate(item, state, cfg, analytic);

  GradientCheckResult result;
  AdapterState probe = state;
  ReferenceLoss reference(model, item, state, cfg);
  auto check_group = [&](ParamSet& params, const ParamSet& grads) {
    for (auto& [name, t] : params) {
      const auto& g = grads.at(name).values;
      const bool projection = name.starts_with("itm.proj.");
      const std::size_t cols = t.cols();
      for (std::size_t i = 0; i < t.values.size(); ++i) {
        if (!std::isfinite(g[i])) fail(ErrorCode::NumericalError, "non-finite analytic gradient at " + name);
        const double saved = t.values[i];
        t.values[i] = saved + eps;
        const std::size_t row = i / cols;
        if (projection) reference.refresh_projection_row(probe, row);
        const Real up = reference(probe);
        t.values[i] = saved - eps;
        if (projection) reference.refresh_projection_row(probe, row);
        const Real down = reference(probe);
        t.values[i] = saved;
        if (projection) reference.refresh_projection_row(probe, row);
        const double fd = static_cast<double>((up - down) / (2 * static_cast<Real>(eps)));
        if (!std::isfinite(fd)) fail(ErrorCode::NumericalError, "non-finite loss while perturbing " + name);
        ++result.total;
        const double scale = std::max(std::abs(g[i]), std::abs(fd));
        if (scale <= threshold) continue;
        ++result.checked;
        const double rel = std::abs(g[i] - fd) / scale;
        if (rel > result.max_relative_error) {
          result.max_relative_error = rel;
          result.worst_parameter = fmt::format("{}[{}]", name, i);
        }
      }
    }
  };
  check_group(probe.lm, analytic.lm);
  check_group(probe.itm, analytic.itm);
  check_group(probe.backbone, analytic.backbone);
  return result;
}

}  // namespace mmcr
