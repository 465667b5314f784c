// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "mmcr/backends/registry.hpp"
#include "mmcr/common/io.hpp"
#include "mmcr/training/checkpoint.hpp"
#include "mmcr/training/gradient_check.hpp"
#include "mmcr/training/trainer.hpp"
#include "oracles.hpp"
#include "toy_task.hpp"

using namespace mmcr;

namespace {

ScoreVector channels(std::vector<double> lm, std::vector<double> itm, std::vector<double> joint) {
  ScoreVector sv;
  sv.lm = std::move(lm);
  sv.itm = std::move(itm);
  sv.joint = std::move(joint);
  return sv;
}

bool all_zero(const ParamSet& ps) {
  for (const auto& [name, t] : ps) {
    if (std::any_of(t.values.begin(), t.values.end(), [](double v) { return v != 0.0; })) return false;
  }
  return true;
}

struct SmallTask {
  Backends backends = default_backends();
  testing::ToyTask task;
  SmallTask(const std::string& name, std::size_t train = 60, std::size_t dev = 30) {
    testing::ToyTaskConfig cfg;
    cfg.train_items = train;
    cfg.dev_items = dev;
    task = testing::make_toy_task(cfg, *backends.generator, testing::scratch_dir(name));
  }
  AdapterState fresh(int reduction = 16, std::uint64_t seed = 7) const {
    return AdapterState::initialize(backends.text->feature_dim(), backends.vision->feature_dim(), reduction, seed);
  }
};

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("ranking_loss hand cases") {
    CHECK(ranking_loss(std::vector<double>{2.0, 0.5, 0.5}, 0, 1.0) == 0.0);
    // Oracle: hand hinge computation (2.5 + 0.7) / 3, frozen.
    CHECK(ranking_loss(std::vector<double>{0.5, 2.0, 0.2}, 0, 1.0) == doctest::Approx(1.06667).epsilon(1e-5));
    CHECK_ERROR_CODE(ranking_loss(std::vector<double>{0.5, 2.0}, 2, 1.0), ErrorCode::InvalidInput);
    CHECK_ERROR_CODE(ranking_loss(std::vector<double>{0.5, 2.0}, -1, 1.0), ErrorCode::InvalidInput);
  }

  TEST_CASE("ranking_loss_grad is the hinge subgradient") {
    const auto g = ranking_loss_grad(std::vector<double>{0.5, 2.0, 0.2}, 0, 1.0);
    CHECK(g[0] == doctest::Approx(-2.0 / 3.0));
    CHECK(g[1] == doctest::Approx(1.0 / 3.0));
    CHECK(g[2] == doctest::Approx(1.0 / 3.0));
    const auto flat = ranking_loss_grad(std::vector<double>{3.0, 0.0, 0.0}, 0, 1.0);
    CHECK(flat == std::vector<double>{0.0, 0.0, 0.0});
  }

  TEST_CASE("combined_loss sums the configured channels") {
    // Oracle: per-channel hand computation 0 + 4/3 + 1/3, frozen.
    const auto sv = channels({2, 0, 0}, {0, 2, 0}, {1, 1, 0});
    const auto l = combined_loss(sv, 0, RankingConfig{});
    CHECK(l.per_channel[0] == 0.0);
    CHECK(l.per_channel[1] == doctest::Approx(4.0 / 3.0));
    CHECK(l.per_channel[2] == doctest::Approx(1.0 / 3.0));
    CHECK(l.total == doctest::Approx(5.0 / 3.0).epsilon(1e-12));

    const auto same = channels({0.1, 0.4, 0.3}, {0.1, 0.4, 0.3}, {0.1, 0.4, 0.3});
    CHECK(combined_loss(same, 1, 1.0) == doctest::Approx(3.0 * ranking_loss(same.lm, 1, 1.0)));
    CHECK(combined_loss(channels({5, 0, 0}, {5, 0, 0}, {5, 0, 0}), 0, 1.0) == 0.0);

    RankingConfig lm_only;
    lm_only.channels = {Channel::LM};
    auto text_only = channels({0.2, 0.1}, {}, {});
    text_only.itm_available = false;
    CHECK(combined_loss(text_only, 0, lm_only).total == doctest::Approx(ranking_loss(text_only.lm, 0, 1.0)));
    CHECK_ERROR_CODE(combined_loss(text_only, 0, RankingConfig{}), ErrorCode::ChannelMissing);
  }

  TEST_CASE("combined_loss_grad splits the joint channel evenly") {
    RankingConfig joint_only;
    joint_only.channels = {Channel::Joint};
    const auto sv = channels({0, 0}, {0, 0}, {0, 0});
    const auto g = combined_loss_grad(sv, 0, joint_only);
    const auto direct = ranking_loss_grad(sv.joint, 0, 1.0);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(g.d_lm[i] == 0.5 * direct[i]);
      CHECK(g.d_itm[i] == 0.5 * direct[i]);
    }
  }

  TEST_CASE("RankingConfig validation") {
    RankingConfig bad;
    bad.margin = 0.0;
    CHECK_ERROR_CODE(bad.validate(), ErrorCode::InvalidInput);
    RankingConfig none;
    none.channels.clear();
    CHECK_ERROR_CODE(none.validate(), ErrorCode::InvalidInput);
    CHECK(parse_channel("joint") == Channel::Joint);
    CHECK_ERROR_CODE(parse_channel("vision"), ErrorCode::UsageError);
  }

  TEST_CASE("adapter groups are disjoint and shaped") {
    const auto s = AdapterState::initialize(32, 24, 16, 1);
    CHECK(s.bottleneck() == 2);
    s.validate();
    for (const auto& [name, t] : s.lm) CHECK(s.itm.count(name) == 0);
    CHECK(s.itm.at("itm.proj.weight").shape == std::vector<std::size_t>{32, 24});
    CHECK(s.trainable_count() <= 5000);
    AdapterState clash = s;
    clash.itm["lm.up.bias"] = Tensor::vector(32);
    CHECK_ERROR_CODE(clash.validate(), ErrorCode::InvalidInput);
    CHECK(AdapterState::initialize(32, 32, 64, 1).bottleneck() == 1);
  }

  TEST_CASE("gradients route each channel to its own adapter") {
    SmallTask t("training_routing", 6, 3);
    TrainableModel model(t.backends, ScoringMode::Masked);
    auto state = t.fresh();
    // Non-zero up-projections so that every adapter tensor receives gradient.
    for (auto* group : {&state.lm, &state.itm}) {
      for (auto& [name, tensor] : *group) {
        if (name.find(".up.") != std::string::npos) {
          for (std::size_t i = 0; i < tensor.values.size(); ++i) tensor.values[i] = 0.01 * std::sin(1.0 + i);
        }
      }
    }
    const auto& item = t.task.train.front();
    RankingConfig lm_only;
    lm_only.channels = {Channel::LM};
    lm_only.margin = 100.0;
    auto g = AdapterGrads::zeros_for(state, {});
    model.accumulate(item, state, lm_only, g);
    CHECK_FALSE(all_zero(g.lm));
    CHECK(all_zero(g.itm));

    RankingConfig itm_only = lm_only;
    itm_only.channels = {Channel::ITM};
    auto h = AdapterGrads::zeros_for(state, {});
    model.accumulate(item, state, itm_only, h);
    CHECK(all_zero(h.lm));
    CHECK_FALSE(all_zero(h.itm));
  }

  TEST_CASE("gradient check on toy items") {
    SmallTask t("training_gradcheck", 9, 3);
    TrainableModel model(t.backends, ScoringMode::Masked);
    auto state = t.fresh();
    for (auto& [name, tensor] : state.lm) {
      for (std::size_t i = 0; i < tensor.values.size(); ++i) tensor.values[i] += 0.05 * std::cos(3.0 * i + 1.0);
    }
    std::size_t checked_items = 0;
    for (const auto& item : t.task.train) {
      const auto pass = model.forward(item, state);
      if (hinge_clearance(pass.scores, item.qa.answer_index, RankingConfig{}) < 1e-4) continue;
      const auto r = gradient_check(model, item, state, 1e-5);
      CHECK(r.max_relative_error <= 1e-6);
      CHECK(r.total == state.trainable_count());
      if (++checked_items == 2) break;
    }
    CHECK(checked_items == 2);
    CHECK_ERROR_CODE(gradient_check(model, t.task.train.front(), state, 1e-9), ErrorCode::InvalidInput);
  }

  TEST_CASE("training keeps the backbone frozen and learns") {
    SmallTask t("training_train", 60, 30);
    TrainableModel model(t.backends, ScoringMode::Masked);
    auto state = t.fresh(2);
    const std::string frozen = checksum(model.frozen_parameters());
    const double before = [&] {
      double s = 0;
      for (const auto& p : t.task.train) s += model.loss(p, state, RankingConfig{});
      return s;
    }();
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.batch_size = 4;
    cfg.epochs = 2;
    const auto report = train(t.task.train, state, model, cfg, RankingConfig{});
    CHECK(report.steps == 30);
    CHECK(report.epochs.size() == 2);
    CHECK(report.frozen_checksum_before == frozen);
    CHECK(report.frozen_checksum_after == frozen);
    CHECK(checksum(t.backends.frozen_parameters()) == checksum(model.frozen_parameters()));
    double after = 0;
    for (const auto& p : t.task.train) after += model.loss(p, state, RankingConfig{});
    CHECK(after < before);
  }

  TEST_CASE("learning rate zero leaves adapters untouched") {
    SmallTask t("training_lr0", 8, 3);
    TrainableModel model(t.backends, ScoringMode::Masked);
    auto state = t.fresh();
    const std::string before = state.checksum();
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.batch_size = 3;
    cfg.max_steps = 2;
    const auto report = train(t.task.train, state, model, cfg, RankingConfig{});
    CHECK(report.steps == 2);
    CHECK(state.checksum() == before);
  }

  TEST_CASE("trainer input validation") {
    SmallTask t("training_validation", 3, 3);
    TrainableModel model(t.backends, ScoringMode::Masked);
    auto state = t.fresh();
    CHECK_ERROR_CODE(train({}, state, model, TrainConfig{}, RankingConfig{}), ErrorCode::InvalidInput);
    TrainConfig bad;
    bad.batch_size = 0;
    CHECK_ERROR_CODE(train(t.task.train, state, model, bad, RankingConfig{}), ErrorCode::InvalidInput);
  }

  TEST_CASE("full fine-tuning trains a backbone copy only") {
    SmallTask t("training_full", 12, 3);
    TrainableModel model(t.backends, ScoringMode::Masked);
    auto state = t.fresh();
    enable_full_finetuning(state, model);
    const std::string lm_before = checksum(state.lm);
    const std::string frozen = checksum(model.frozen_parameters());
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 4;
    cfg.epochs = 1;
    train(t.task.train, state, model, cfg, RankingConfig{});
    CHECK(checksum(state.lm) == lm_before);
    CHECK(checksum(state.backbone) != checksum(t.backends.text->frozen_parameters()));
    CHECK(checksum(model.frozen_parameters()) == frozen);
  }

  TEST_CASE("checkpoints round-trip and detect corruption") {
    const auto dir = testing::scratch_dir("training_ckpt");
    auto state = AdapterState::initialize(32, 32, 8, 4);
    state.lm.at("lm.up.bias").values[0] = 0.125;
    save_checkpoint(dir / "a.ckpt", state, Json{{"lr", 0.5}});
    const auto back = load_checkpoint(dir / "a.ckpt");
    CHECK(back.state.checksum() == state.checksum());
    CHECK(back.state.reduction_factor == 8);
    CHECK(back.config.at("lr") == 0.5);

    std::string bytes = encode_checkpoint(state, Json::object());
    bytes[bytes.size() / 2] ^= 0x40;
    CHECK_ERROR_CODE(decode_checkpoint(bytes), ErrorCode::SchemaError);
    CHECK_ERROR_CODE(decode_checkpoint("not a checkpoint"), ErrorCode::SchemaError);

    const auto backends = default_backends();
    CHECK_ERROR_CODE(check_compatible(AdapterState::initialize(16, 32, 8, 1), backends), ErrorCode::DimensionError);
    check_compatible(state, backends);
  }
}
