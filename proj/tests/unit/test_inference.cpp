// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "mmcr/backends/registry.hpp"
#include "mmcr/dataset/image_store.hpp"
#include "mmcr/inference/inference.hpp"
#include "oracles.hpp"
#include "toy_task.hpp"

using namespace mmcr;

TEST_SUITE("inference") {
  TEST_CASE("softmax hand cases") {
    const auto u = softmax(std::vector<double>{0, 0, 0});
    for (double p : u) CHECK(p == 1.0 / 3.0);
    // Oracle: hand exponentials e^2 / (e^2 + 1), frozen.
    const auto p = softmax(std::vector<double>{2, 0});
    CHECK(p[0] == doctest::Approx(0.88080).epsilon(1e-5));
    CHECK(p[1] == doctest::Approx(0.11920).epsilon(1e-4));
    const auto big = softmax(std::vector<double>{1000, 999});
    CHECK(std::isfinite(big[0]));
    CHECK(big[0] + big[1] == doctest::Approx(1.0));
    CHECK_ERROR_CODE(softmax(std::vector<double>{}), ErrorCode::InvalidInput);
    CHECK_ERROR_CODE(softmax(std::vector<double>{1.0, NAN}), ErrorCode::InvalidInput);
  }

  TEST_CASE("argmax prefers the lowest index on ties") {
    CHECK(argmax(std::vector<double>{0.2, 0.5, 0.5}) == 1);
    CHECK(argmax(std::vector<double>{0.5, 0.5}) == 0);
  }

  TEST_CASE("ensemble boundaries and the symmetric tie") {
    const std::vector<double> a{0.8, 0.2}, b{0.2, 0.8};
    CHECK(ensemble(a, b, 0.0).probs == a);
    CHECK(ensemble(a, b, 1.0).probs == b);
    const auto mid = ensemble(a, b, 0.5);
    CHECK(mid.probs[0] == doctest::Approx(0.5));
    CHECK(mid.probs[1] == doctest::Approx(0.5));
    CHECK(mid.predicted_index == 0);
    CHECK_ERROR_CODE(ensemble(a, std::vector<double>{1.0}, 0.5), ErrorCode::InvalidInput);
    CHECK_ERROR_CODE(ensemble(a, b, 1.5), ErrorCode::InvalidInput);
  }

  TEST_CASE("predict_from_scores uses only what lambda needs") {
    auto sv = testing::two_way_scores(0.3, 0.9);
    const auto text = predict_from_scores("x", sv, EnsembleConfig{0.0, TextChannel::LM});
    CHECK(text.ok());
    CHECK(text.predicted_index == 1);
    CHECK(text.p_itm.empty());
    const auto both = predict_from_scores("x", sv, EnsembleConfig{0.5, TextChannel::LM});
    CHECK(both.predicted_index == 0);

    sv.errors = {"MissingImage: gone", "MissingImage: gone"};
    CHECK(predict_from_scores("x", sv, EnsembleConfig{0.0, TextChannel::LM}).ok());
    CHECK_FALSE(predict_from_scores("x", sv, EnsembleConfig{0.5, TextChannel::LM}).ok());
    CHECK_FALSE(predict_from_scores("x", sv, EnsembleConfig{0.0, TextChannel::Joint}).ok());
  }

  TEST_CASE("parse_grid") {
    const auto g = parse_grid("0:1:0.05");
    REQUIRE(g.size() == 21);
    CHECK(g[7] == 0.35);
    CHECK(g.back() == 1.0);
    CHECK(parse_grid("0.25") == std::vector<double>{0.25});
    CHECK(default_grid() == g);
    CHECK_ERROR_CODE(parse_grid("0:1:0"), ErrorCode::UsageError);
    CHECK_ERROR_CODE(parse_grid("a:b:c"), ErrorCode::UsageError);
  }

  TEST_CASE("sweep_lambda on the constructed four-item set") {
    // Oracle: exhaustive accuracy evaluation over the grid, recomputed here.
    const auto items = testing::sweep_fixture();
    const auto grid = default_grid();
    const auto r = sweep_lambda(items, grid);
    CHECK(r.best_lambda == 0.5);
    CHECK(r.best_accuracy == 1.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      int correct = 0;
      for (const auto& it : items) {
        const auto pt = oracle::softmax(it.scores.lm);
        const auto pi = oracle::softmax(it.scores.itm);
        const long double l = grid[k];
        const long double p0 = (1 - l) * pt[0] + l * pi[0];
        const long double p1 = (1 - l) * pt[1] + l * pi[1];
        correct += (p0 >= p1) ? 1 : 0;
      }
      CHECK(r.accuracy[k] == doctest::Approx(correct / 4.0));
    }
    CHECK(r.to_csv().rfind("lambda,accuracy\n", 0) == 0);
  }

  TEST_CASE("sweep_lambda boundary dominance and degenerate grids") {
    // Text alone is perfect and the image channel anti-correlated.
    std::vector<ScoredItem> items;
    for (int i = 0; i < 6; ++i) items.push_back({std::to_string(i), testing::two_way_scores(0.7, 0.1), 0});
    CHECK(sweep_lambda(items, default_grid()).best_lambda == 0.0);
    const std::vector<double> one{0.3};
    CHECK(sweep_lambda(items, one).best_lambda == 0.3);
    CHECK_ERROR_CODE(sweep_lambda({}, default_grid()), ErrorCode::InvalidInput);
  }

  TEST_CASE("predict end to end") {
    const auto backends = default_backends();
    testing::ToyTaskConfig cfg;
    cfg.train_items = 3;
    cfg.dev_items = 6;
    const auto dir = testing::scratch_dir("inference_predict");
    const auto task = testing::make_toy_task(cfg, *backends.generator, dir);
    for (const auto& pair : task.dev) {
      const auto text = predict(pair, nullptr, backends, EnsembleConfig{0.0, TextChannel::LM});
      const auto sv = score_choices(pair, backends, nullptr);
      CHECK(text.predicted_index == argmax(sv.lm));
      const auto a = predict(pair, nullptr, backends, EnsembleConfig{});
      const auto b = predict(pair, nullptr, backends, EnsembleConfig{});
      CHECK(a.probs == b.probs);
      CHECK(a.predicted_index == b.predicted_index);
    }

    // Without an image the store generates one from the question.
    VQAPair bare = task.dev.front();
    bare.image.reset();
    ImageStore store(dir / "gen", backends.generator);
    const auto p = predict(bare, nullptr, backends, EnsembleConfig{}, &store);
    CHECK(p.ok());
    CHECK(store.generator_calls() == 1);
    const auto no_store = predict(bare, nullptr, backends, EnsembleConfig{});
    CHECK_FALSE(no_store.ok());
    CHECK(predict(bare, nullptr, backends, EnsembleConfig{0.0, TextChannel::LM}).ok());
  }

  TEST_CASE("score_items keeps input order for any thread count") {
    const auto backends = default_backends();
    testing::ToyTaskConfig cfg;
    cfg.train_items = 3;
    cfg.dev_items = 12;
    const auto task = testing::make_toy_task(cfg, *backends.generator, testing::scratch_dir("inference_threads"));
    const auto one = score_items(task.dev, backends, nullptr, {}, 1);
    const auto four = score_items(task.dev, backends, nullptr, {}, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].id == task.dev[i].qa.id);
      CHECK(one[i].id == four[i].id);
      CHECK(one[i].scores.lm == four[i].scores.lm);
      CHECK(one[i].scores.itm == four[i].scores.itm);
    }
  }
}
