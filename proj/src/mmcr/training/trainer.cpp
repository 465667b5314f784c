// SPDX-License-Identifier: Apache-2.0
#include "mmcr/training/trainer.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "mmcr/common/error.hpp"
#include "mmcr/common/log.hpp"
#include "mmcr/common/rng.hpp"

namespace mmcr {

namespace {

void sgd_step(ParamSet& params, const ParamSet& grads, double lr) {
  for (auto& [name, t] : params) {
    const auto& g = grads.at(name).values;
    for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] -= lr * g[i];
  }
}

void check_finite(const AdapterGrads& g, const std::string& context) {
  for (const auto* group : {&g.lm, &g.itm, &g.backbone}) {
    for (const auto& [name, t] : *group) {
      for (double v : t.values) {
        if (!std::isfinite(v)) fail(ErrorCode::NumericalError, "non-finite gradient in " + name + " " + context);
      }
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  require(batch_size > 0, ErrorCode::InvalidInput, "batch size must be positive");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorCode::InvalidInput,
          "learning rate must be finite and non-negative");
  require(epochs > 0, ErrorCode::InvalidInput, "epochs must be positive");
}

OrderedJson TrainReport::to_json() const {
  OrderedJson j;
  j["steps"] = steps;
  j["epochs"] = OrderedJson::array();
  for (const auto& e : epochs) {
    OrderedJson ej;
    ej["epoch"] = e.epoch;
    ej["steps"] = e.steps;
    ej["items"] = e.items;
    OrderedJson ml;
    ml["lm"] = e.mean_loss[0];
    ml["itm"] = e.mean_loss[1];
    ml["joint"] = e.mean_loss[2];
    ej["mean_loss"] = ml;
    ej["mean_total"] = e.mean_total;
    j["epochs"].push_back(ej);
  }
  j["frozen_checksum_before"] = frozen_checksum_before;
  j["frozen_checksum_after"] = frozen_checksum_after;
  j["adapter_checksum"] = adapter_checksum;
  return j;
}

void enable_full_finetuning(AdapterState& state, const TrainableModel& model) {
  state.adapters_enabled = false;
  state.backbone = model.text().frozen_parameters();
}

TrainReport train(const std::vector<VQAPair>& dataset, AdapterState& state, const TrainableModel& model,
                  const TrainConfig& cfg, const RankingConfig& rcfg,
                  const std::function<void(const EpochReport&)>& on_epoch) {
  require(!dataset.empty(), ErrorCode::InvalidInput, "training set is empty");
  cfg.validate();
  rcfg.validate();
  state.validate();
  for (const auto& p : dataset) validate(p.qa);

  TrainReport report;
  report.frozen_checksum_before = checksum(model.frozen_parameters());

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  bool stop = false;

  for (int epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
    rng.shuffle(order);
    EpochReport er;
    er.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      AdapterGrads grads = AdapterGrads::zeros_for(state, state.backbone);
      for (std::size_t k = start; k < end; ++k) {
        const VQAPair& item = dataset[order[k]];
        const ChannelLosses l = model.accumulate(item, state, rcfg, grads);
        if (!std::isfinite(l.total)) {
          fail(ErrorCode::NumericalError,
               fmt::format("non-finite loss on item {} (epoch {}, step {}): lm={} itm={} joint={}", item.qa.id,
                           epoch, report.steps + 1, l.per_channel[0], l.per_channel[1], l.per_channel[2]));
        }
        for (std::size_t c = 0; c < 3; ++c) er.mean_loss[c] += l.per_channel[c];
        er.mean_total += l.total;
        ++er.items;
      }
      grads.scale(1.0 / static_cast<double>(end - start));
      check_finite(grads, fmt::format("(epoch {}, step {})", epoch, report.steps + 1));
      if (cfg.learning_rate != 0.0) {
        sgd_step(state.lm, grads.lm, cfg.learning_rate);
        sgd_step(state.itm, grads.itm, cfg.learning_rate);
        sgd_step(state.backbone, grads.backbone, cfg.learning_rate);
      }
      ++er.steps;
      ++report.steps;
      if (cfg.max_steps != 0 && report.steps >= cfg.max_steps) {
        stop = true;
        break;
      }
    }
    for (auto& v : er.mean_loss) v /= static_cast<double>(er.items);
    er.mean_total /= static_cast<double>(er.items);
    log::get().info("epoch {}: {} steps, mean loss lm={:.6f} itm={:.6f} joint={:.6f}", epoch, er.steps,
                    er.mean_loss[0], er.mean_loss[1], er.mean_loss[2]);
    if (on_epoch) on_epoch(er);
    report.epochs.push_back(er);
  }

  report.frozen_checksum_after = checksum(model.frozen_parameters());
  report.adapter_checksum = state.checksum();
  return report;
}

}  // namespace mmcr
