// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fmt/format.h>

#include <set>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "mmcr/backends/registry.hpp"
#include "mmcr/backends/stub_image.hpp"
#include "mmcr/backends/toy_text.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/io.hpp"
#include "mmcr/training/adapter_state.hpp"

using namespace mmcr;

TEST_SUITE("backends") {
  TEST_CASE("stub_encode_text is a pure function of its inputs") {
    const auto a = stub_encode_text("PersonX eats breakfast", ScoringMode::Masked, 7);
    const auto b = stub_encode_text("PersonX eats breakfast", ScoringMode::Masked, 7);
    CHECK(a.context_vector == b.context_vector);
    CHECK(a.token_log_probs == b.token_log_probs);
    const auto c = stub_encode_text("PersonX eats breakfast", ScoringMode::Autoregressive, 7);
    CHECK(c.context_vector.size() == a.context_vector.size());
    CHECK(c.token_log_probs.size() == a.token_log_probs.size());
    for (double lp : a.token_log_probs) {
      CHECK(lp <= 0.0);
      CHECK(lp >= ToyTextScorer::kMinLogProb);
    }
    CHECK_ERROR_CODE(stub_encode_text("", ScoringMode::Masked, 7), ErrorCode::InvalidInput);
    CHECK_ERROR_CODE(stub_encode_text(" ,. ", ScoringMode::Masked, 7), ErrorCode::InvalidInput);
  }

  TEST_CASE("one changed token changes the features") {
    // Oracle: direct count over 100 fixture pairs.
    int differ = 0;
    for (int i = 0; i < 100; ++i) {
      const auto a = stub_encode_text(fmt::format("the person holds item{} today", i), ScoringMode::Masked, 3);
      const auto b = stub_encode_text(fmt::format("the person holds thing{} today", i), ScoringMode::Masked, 3);
      differ += a.context_vector != b.context_vector ? 1 : 0;
    }
    CHECK(differ >= 99);
  }

  TEST_CASE("text features honor the descriptor dimension") {
    ToyTextScorer scorer(BackendDescriptor{BackendKind::TextScorer, "stub", {{"feature_dim", 12}}});
    CHECK(scorer.feature_dim() == 12);
    const auto f = scorer.encode(TextInput{{"a", "question"}, {"an", "answer"}}, ScoringMode::Masked);
    CHECK(f.context_vector.size() == 12);
    CHECK(f.token_log_probs.size() == 2);
  }

  TEST_CASE("adapters with a zero up-projection leave features unchanged") {
    ToyTextScorer scorer(BackendDescriptor{BackendKind::TextScorer, "stub", {}});
    auto state = AdapterState::initialize(scorer.feature_dim(), 32, 16, 1);
    const TextInput in{{"where", "is", "the", "cup"}, {"on", "the", "table"}};
    const auto base = scorer.encode(in, ScoringMode::Masked);
    const auto with = scorer.encode(in, ScoringMode::Masked, &state);
    CHECK(base.token_log_probs == with.token_log_probs);
    CHECK(base.context_vector == with.context_vector);
  }

  TEST_CASE("stub_generate_image is content addressed") {
    const auto dir = testing::scratch_dir("backends_gen");
    const auto a = stub_generate_image("PersonX eats breakfast", 384, 50, 7, dir);
    const auto b = stub_generate_image("PersonX eats breakfast", 384, 50, 7, dir);
    CHECK(a == b);
    CHECK(a.resolution == 384);
    CHECK(a.prompt_hash == sha256_hex(std::string_view("PersonX eats breakfast")));
    CHECK(fs::path(a.path).filename() == a.prompt_hash + ".img");
    const auto c = stub_generate_image("PersonX eats breakfast", 512, 50, 7, dir / "512");
    CHECK(c.resolution == 512);
    CHECK(c.id == a.id);
    CHECK_ERROR_CODE(stub_generate_image("x", 0, 50, 7, dir), ErrorCode::InvalidInput);
  }

  TEST_CASE("unwritable image storage is a StorageError") {
    const auto dir = testing::scratch_dir("backends_unwritable");
    write_file_atomic(dir / "blocker", "file, not a directory");
    CHECK_ERROR_CODE(stub_generate_image("a prompt", 384, 50, 7, dir / "blocker"), ErrorCode::StorageError);
  }

  TEST_CASE("stub image container round-trips") {
    const StubImageHeader h{384, 50, 9, std::string(64, 'a')};
    Raster r{3, 2, {1, 2, 3, 4, 5, 6}};
    const std::string bytes = encode_stub_image(h, r);
    const auto decoded = decode_stub_image(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
    REQUIRE(decoded.has_value());
    CHECK(decoded->first == h);
    CHECK(decoded->second == r);
    CHECK_FALSE(decode_stub_image(std::vector<std::uint8_t>{'P', 'N', 'G'}).has_value());
    const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + 12);
    CHECK_ERROR_CODE(decode_stub_image(truncated), ErrorCode::SchemaError);
  }

  TEST_CASE("default visual grid is 14x14") {
    const auto dir = testing::scratch_dir("backends_vis");
    const auto img = stub_generate_image("a dog on a bench", 384, 50, 1, dir);
    const auto v = stub_encode_image(img, 3);
    CHECK(v.rows == 14);
    CHECK(v.cols == 14);
    CHECK(v.patch_count() == 196);
    CHECK(v.patches.size() == 196 * v.dim);
    CHECK(stub_encode_image(img, 3).patches == v.patches);
    for (double x : v.patches) CHECK(std::isfinite(x));

    StubVisualEncoder small(parse_backend_spec("visual_encoder=stub:grid_rows=2,grid_cols=2"));
    CHECK(small.encode(img).patch_count() == 4);
  }

  TEST_CASE("missing images raise MissingImage") {
    const ImageRef ghost{"ghost", "/nonexistent/ghost.img", 384, "stub", ""};
    CHECK_ERROR_CODE(stub_encode_image(ghost, 0), ErrorCode::MissingImage);
    CHECK_ERROR_CODE(stub_caption(ghost), ErrorCode::MissingImage);
  }

  TEST_CASE("captions are deterministic and diverse") {
    const auto dir = testing::scratch_dir("backends_caption");
    std::set<std::string> captions;
    for (int i = 0; i < 100; ++i) {
      const auto img = stub_generate_image(fmt::format("scene number {}", i), 384, 50, 0, dir);
      const auto cap = stub_caption(img);
      CHECK_FALSE(cap.empty());
      CHECK(stub_caption(img) == cap);
      captions.insert(cap);
    }
    CHECK(captions.size() >= 99);
  }

  TEST_CASE("backend specs parse and resolve") {
    const auto d = parse_backend_spec("visual_encoder=stub:grid_rows=2,grid_cols=3");
    CHECK(d.kind == BackendKind::VisualEncoder);
    CHECK(d.get("grid_rows", 0) == 2);
    CHECK(d.to_spec() == "visual_encoder=stub:grid_cols=3,grid_rows=2");
    CHECK_ERROR_CODE(parse_backend_spec("nonsense"), ErrorCode::UsageError);
    CHECK_ERROR_CODE(parse_backend_spec("captioner=stub:seed=abc"), ErrorCode::UsageError);
    CHECK_ERROR_CODE(parse_backend_spec("visual_encoder=stub:feature_dim=0").validate(), ErrorCode::InvalidInput);

    const auto env = [](const std::string& name) -> std::optional<std::string> {
      if (name == "MMCR_BACKEND_CAPTIONER") return "captioner=stub:seed=5";
      return std::nullopt;
    };
    const auto all = resolve_backends({"text_scorer=stub:seed=9"}, env);
    REQUIRE(all.size() == 4);
    for (const auto& b : all) {
      if (b.kind == BackendKind::TextScorer) CHECK(b.get("seed", 0) == 9);
      if (b.kind == BackendKind::Captioner) CHECK(b.get("seed", 0) == 5);
    }
    CHECK_ERROR_CODE(resolve_backends({"captioner=stub", "captioner=stub"}, env), ErrorCode::UsageError);
    CHECK_ERROR_CODE(make_backends({parse_backend_spec("text_scorer=gpt")}), ErrorCode::UsageError);
  }

  TEST_CASE("materialized descriptors carry their defaults") {
    const auto backends = default_backends();
    const auto descs = backends.descriptors();
    REQUIRE(descs.size() == 4);
    CHECK(descs[0].config.count("feature_dim") == 1);
    CHECK(backends.vision->descriptor().get("grid_rows", 0) == 14);
    const auto frozen = backends.frozen_parameters();
    CHECK_FALSE(frozen.empty());
    for (const auto& [name, t] : frozen) {
      CHECK((name.rfind("text.", 0) == 0 || name.rfind("vision.", 0) == 0));
    }
  }
}
