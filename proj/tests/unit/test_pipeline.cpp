// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fmt/format.h>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "mmcr/common/io.hpp"
#include "mmcr/pipeline/commands.hpp"
#include "mmcr/pipeline/plots.hpp"

using namespace mmcr;

namespace {

std::optional<std::string> no_env(const std::string&) { return std::nullopt; }

std::string sweep_csv() {
  std::string csv = "lambda,accuracy\n";
  for (int k = 0; k <= 20; ++k) csv += fmt::format("{:.2f},{:.4f}\n", k * 0.05, 0.5 + 0.02 * (k < 12 ? k : 24 - k));
  return csv;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("sweep CSV parsing") {
    const auto curve = parse_sweep_csv(sweep_csv());
    REQUIRE(curve.size() == 21);
    CHECK(curve[12].lambda == doctest::Approx(0.6));
    CHECK(curve[12].accuracy == doctest::Approx(0.74));
    CHECK_ERROR_CODE(parse_sweep_csv(""), ErrorCode::SchemaError);
    CHECK_ERROR_CODE(parse_sweep_csv("lambda,accuracy\n"), ErrorCode::SchemaError);
    CHECK_ERROR_CODE(parse_sweep_csv("lambda,accuracy\n0.1,abc\n"), ErrorCode::SchemaError);
  }

  TEST_CASE("curve plot marks the optimum and is reproducible") {
    const auto dir = testing::scratch_dir("pipeline_plots");
    write_file_atomic(dir / "sweep.csv", sweep_csv());
    const auto a = emit_plots(dir / "sweep.csv", dir / "a");
    const auto b = emit_plots(dir / "sweep.csv", dir / "b");
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    const auto svg = read_text_file(a[0]);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("best lambda 0.60") != std::string::npos);
    CHECK(svg == read_text_file(b[0]));

    write_file_atomic(dir / "empty.csv", "");
    CHECK_ERROR_CODE(emit_plots(dir / "empty.csv", dir / "c"), ErrorCode::SchemaError);
    write_file_atomic(dir / "other.json", R"({"kind": "mystery"})");
    CHECK_ERROR_CODE(emit_plots(dir / "other.json", dir / "c"), ErrorCode::SchemaError);
  }

  TEST_CASE("report plots") {
    const auto dir = testing::scratch_dir("pipeline_report_plots");
    write_file_atomic(dir / "hh.json", R"({"schema_version": 1, "kind": "helpful-harmful", "rows": [
        {"benchmark": "CSQA", "helpful_pct": 12.5, "harmful_pct": 4.0},
        {"benchmark": "PIQA", "helpful_pct": 8.0, "harmful_pct": 6.5}]})");
    const auto files = emit_plots(dir / "hh.json", dir / "out");
    REQUIRE(files.size() == 1);
    const auto svg = read_text_file(files[0]);
    CHECK(svg.find("CSQA") != std::string::npos);
    CHECK(svg.find("PIQA") != std::string::npos);
    CHECK(bar_chart_svg("t", {"x"}, {{"s", {1.0}}}, 2.0) == bar_chart_svg("t", {"x"}, {{"s", {1.0}}}, 2.0));
  }

  TEST_CASE("resolve_config fills and checks options") {
    const auto dir = testing::scratch_dir("pipeline_config");
    const auto cfg = resolve_config("eval", Json{{"out_dir", dir.string() + "/"}, {"data", "rel/dev.jsonl"}}, no_env);
    CHECK(cfg.at("seed") == kDefaultSeed);
    CHECK(cfg.at("lambda") == 0.5);
    CHECK(cfg.at("out_dir") == dir.string());
    CHECK(cfg.at("out") == (dir / "predictions.jsonl").string());
    CHECK(fs::path(cfg.at("data").get<std::string>()).is_absolute());
    REQUIRE(cfg.at("backends").size() == 4);
    CHECK(cfg.at("backends")[1].get<std::string>().find("grid_rows=14") != std::string::npos);

    CHECK_ERROR_CODE(resolve_config("eval", Json{{"lamda", 0.3}}, no_env), ErrorCode::UsageError);
    CHECK_ERROR_CODE(resolve_config("eval", Json{{"lambda", "high"}}, no_env), ErrorCode::UsageError);
    CHECK_ERROR_CODE(resolve_config("train", Json{{"adapters", "x.ckpt"}}, no_env), ErrorCode::UsageError);
    CHECK_ERROR_CODE(resolve_config("train", Json{{"epochs", -1}}, no_env), ErrorCode::UsageError);
    CHECK_ERROR_CODE(resolve_config("dance", Json::object(), no_env), ErrorCode::UsageError);

    const auto env = [](const std::string& name) -> std::optional<std::string> {
      if (name == "MMCR_BACKEND_VISUAL_ENCODER") return "visual_encoder=stub:grid_rows=2,grid_cols=2";
      return std::nullopt;
    };
    const auto with_env = resolve_config("eval", Json::object(), env);
    CHECK(with_env.at("backends")[1].get<std::string>().find("grid_rows=2") != std::string::npos);
    const auto explicit_wins =
        resolve_config("eval", Json{{"backends", {"visual_encoder=stub:grid_rows=3,grid_cols=3"}}}, env);
    CHECK(explicit_wins.at("backends")[1].get<std::string>().find("grid_rows=3") != std::string::npos);
  }

  TEST_CASE("every command has defaults") {
    for (const auto& c : command_names()) {
      const auto d = command_defaults(c);
      CHECK(d.contains("seed"));
      CHECK(d.contains("out_dir"));
    }
  }

  TEST_CASE("run_command writes a manifest that replays identically") {
    const auto dir = testing::scratch_dir("pipeline_run");
    const auto cfg = resolve_config("build-dataset",
                                    Json{{"kb", (testing::fixture_dir() / "kb_triples.jsonl").string()},
                                         {"vcr", (testing::fixture_dir() / "vcr.jsonl").string()},
                                         {"out_dir", dir.string()},
                                         {"seed", 3}},
                                    no_env);
    const auto outcome = run_command("build-dataset", cfg);
    CHECK(outcome.manifest_path == dir / "build-dataset.manifest.json");
    const auto m = Json::parse(read_text_file(outcome.manifest_path));
    for (const char* key : {"schema_version", "subcommand", "tool_version", "seed", "config", "input_digests",
                            "outputs", "started_at", "wall_clock_seconds"}) {
      CHECK(m.contains(key));
    }
    CHECK(m.at("input_digests").at("kb") == digest_path(testing::fixture_dir() / "kb_triples.jsonl"));
    CHECK(m.at("seed") == 3);

    const std::string before = read_text_file(dir / "dataset" / "train.jsonl");
    const auto digest = digest_path(dir / "dataset");
    replay_manifest(outcome.manifest_path);
    CHECK(read_text_file(dir / "dataset" / "train.jsonl") == before);
    CHECK(digest_path(dir / "dataset") == digest);
    CHECK_ERROR_CODE(replay_manifest(dir / "nope.json"), ErrorCode::IoError);
  }
}
