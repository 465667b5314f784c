// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mmcr/training/model.hpp"

namespace mmcr {

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-5;
  int epochs = 2;
  std::uint64_t seed = 0;
  std::size_t max_steps = 0;  // 0 = no limit

  void validate() const;
};

struct EpochReport {
  int epoch = 0;
  std::size_t steps = 0;
  std::size_t items = 0;
  std::array<double, 3> mean_loss{0.0, 0.0, 0.0};  // per Channel, over items
  double mean_total = 0.0;
};

struct TrainReport {
  std::vector<EpochReport> epochs;
  std::size_t steps = 0;
  std::string frozen_checksum_before;
  std::string frozen_checksum_after;
  std::string adapter_checksum;

  OrderedJson to_json() const;
};

// Mini-batch SGD on the mean batch loss. Items are reshuffled every epoch by
// a generator seeded from cfg.seed. Only the adapter groups (and the
// backbone copy, when the state carries one) are updated. A non-finite loss
// or gradient raises NumericalError naming the item.
TrainReport train(const std::vector<VQAPair>& dataset, AdapterState& state, const TrainableModel& model,
                  const TrainConfig& cfg, const RankingConfig& rcfg,
                  const std::function<void(const EpochReport&)>& on_epoch = {});

// Switches a fresh state to the full fine-tuning ablation: adapters off, a
// trainable copy of the text backbone in state.backbone.
void enable_full_finetuning(AdapterState& state, const TrainableModel& model);

}  // namespace mmcr
