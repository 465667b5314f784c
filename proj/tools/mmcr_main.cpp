// SPDX-License-Identifier: Apache-2.0
// Command-line front end. All work goes through the C API in libmmcr.

#include <cctype>
#include <cstdint>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmcr/mmcr.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string env_name(const std::string& key) {
  std::string out = "MMCR_";
  for (char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void print_error(const std::string& code, int status, const std::string& message) {
  Json j{{"error", {{"code", code}, {"status", status}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
}

// Options are recorded into the partial config only when given on the command
// line or through the environment; defaults live in the library.
class ConfigBuilder {
 public:
  explicit ConfigBuilder(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option("--" + flag, *value, help)->envname(env_name(flag));
    setters_.push_back([opt, value, key](Json& cfg) {
      if (opt->count() > 0) cfg[key] = *value;
    });
    return opt;
  }

  CLI::Option* flag(const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app_->add_flag("--" + flag, *value, help)->envname(env_name(flag));
    setters_.push_back([opt, value, key](Json& cfg) {
      if (opt->count() > 0) cfg[key] = *value;
    });
    return opt;
  }

  void apply(Json& cfg) const {
    for (const auto& s : setters_) s(cfg);
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void(Json&)>> setters_;
};

void add_data_source(ConfigBuilder& b, bool with_adapters) {
  b.add<std::string>("data", "data", "dataset directory or JSON Lines file");
  b.add<std::string>("benchmark", "benchmark", "benchmark name (aNLI, CSQA, PIQA, SIQA, WG, ...) for raw files");
  b.add<std::string>("format", "format", "format adapter for raw benchmark files");
  if (with_adapters) b.add<std::string>("adapters", "adapters", "adapter checkpoint (default: none)");
  b.add<std::string>("scoring-mode", "scoring_mode", "masked or autoregressive (default: backend's)");
  b.add<std::string>("images", "images", "image cache for items without images [out-dir/images]");
  b.add<std::int64_t>("resolution", "resolution", "generated image resolution [384]");
  b.add<std::int64_t>("steps", "steps", "generator steps [50]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-choice commonsense reasoning with generated images"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mmcr_version()));

  Json global;
  ConfigBuilder globals(&app);
  globals.add<std::int64_t>("seed", "seed", "random seed [42]");
  globals.add<std::vector<std::string>>("backend", "backends", "backend spec kind=name[:key=value,...], repeatable");
  globals.add<std::string>("out-dir", "out_dir", "directory for outputs and the run manifest [.]");
  globals.add<std::string>("log-level", "log_level", "error, warn, info, debug or off [warn]");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the resolved config and exit");

  struct Sub {
    CLI::App* app;
    std::unique_ptr<ConfigBuilder> options;
  };
  std::vector<Sub> subs;
  auto sub = [&](const std::string& name, const std::string& help) -> ConfigBuilder& {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    subs.push_back({s, std::make_unique<ConfigBuilder>(s)});
    return *subs.back().options;
  };

  {
    auto& b = sub("build-dataset", "build the image-paired training set from knowledge triples and visual QA records");
    b.add<std::string>("kb", "kb", "knowledge triples (JSON Lines)");
    b.add<std::string>("vcr", "vcr", "visual QA records (JSON Lines)");
    b.add<std::string>("out", "out", "output directory [out-dir/dataset]");
    b.add<std::string>("templates", "templates", "relation template table (JSON)");
    b.add<std::string>("names", "names", "person-name lexicon, one per line");
    b.add<std::vector<std::string>>("neutral-names", "neutral_names", "ordered neutral names for person references");
    b.add<std::int64_t>("resolution", "resolution", "image resolution [384]");
    b.add<std::int64_t>("steps", "steps", "generator steps [50]");
    b.add<double>("dev-fraction", "dev_fraction", "fraction of images assigned to dev [0.1]");
    b.add<std::int64_t>("distractors", "distractors", "distractors per synthetic question [2]");
  }
  {
    auto& b = sub("score", "write per-choice LM, ITM and joint scores");
    add_data_source(b, true);
    b.flag("text-only", "text_only", "skip the image channel");
    b.add<std::string>("out", "out", "scores file [out-dir/scores.jsonl]");
  }
  {
    auto& b = sub("train", "train the LM and ITM adapters with the margin ranking loss");
    add_data_source(b, false);
    b.add<double>("margin", "margin", "ranking margin [1.0]");
    b.add<std::int64_t>("batch", "batch", "batch size [32]");
    b.add<double>("lr", "lr", "learning rate [1e-5]");
    b.add<std::int64_t>("epochs", "epochs", "epochs [2]");
    b.add<std::int64_t>("max-steps", "max_steps", "stop after this many steps, 0 for no limit [0]");
    b.add<std::vector<std::string>>("channels", "channels", "loss channels among lm, itm, joint [all]");
    b.add<std::int64_t>("reduction-factor", "reduction_factor", "adapter bottleneck reduction [16]");
    b.flag("full-finetune", "full_finetune", "train the text backbone instead of adapters");
    b.add<std::string>("init", "init", "continue from this checkpoint");
    b.add<std::string>("out", "out", "checkpoint path [out-dir/adapters.ckpt]");
    b.add<std::string>("report", "report", "training report [out-dir/train_report.json]");
  }
  {
    auto& b = sub("eval", "predict answers and report accuracy");
    add_data_source(b, true);
    b.add<double>("lambda", "lambda", "image-channel ensemble weight [0.5]");
    b.add<std::string>("text-channel", "text_channel", "lm or joint [lm]");
    b.add<std::string>("out", "out", "predictions [out-dir/predictions.jsonl]");
    b.add<std::string>("report", "report", "report [out-dir/eval_report.json]");
  }
  {
    auto& b = sub("sweep", "accuracy over a grid of ensemble weights");
    add_data_source(b, true);
    b.add<std::string>("grid", "grid", "lo:hi:step [0:1:0.05]");
    b.add<std::string>("text-channel", "text_channel", "lm or joint [lm]");
    b.add<std::string>("out", "out", "curve CSV [out-dir/sweep.csv]");
    b.add<std::string>("report", "report", "report [out-dir/sweep.json]");
  }
  {
    auto& b = sub("analyze", "helpful/harmful flips, image-text relevance or attention erasure");
    add_data_source(b, true);
    b.add<std::string>("mode", "analysis", "helpful-harmful, relevance or attention [helpful-harmful]");
    b.add<double>("lambda", "lambda", "ensemble weight for helpful-harmful [0.5]");
    b.add<std::string>("text-channel", "text_channel", "lm or joint [lm]");
    b.add<std::int64_t>("erase", "erase", "patches to erase in attention mode [100]");
    b.add<std::int64_t>("limit", "limit", "analyze only the first N items, 0 for all [0]");
    b.add<std::string>("out", "out", "report [out-dir/report.json]");
  }
  {
    auto& b = sub("visualize", "render SVG plots from a sweep CSV or a report");
    b.add<std::string>("input", "input", "sweep CSV or report JSON");
    b.add<std::string>("out", "out", "plot directory [out-dir/plots]");
  }
  CLI::App* replay = app.add_subcommand("replay", "re-run a command from its run manifest");
  std::string manifest;
  replay->add_option("manifest", manifest, "path to a *.manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", MMCR_USAGE_ERROR, e.what());
    return kExitUsage;
  }

  char* summary = nullptr;
  mmcr_status status = MMCR_OK;
  if (replay->parsed()) {
    status = mmcr_replay(manifest.c_str(), &summary);
  } else {
    Json cfg = Json::object();
    globals.apply(cfg);
    std::string name;
    for (const auto& s : subs) {
      if (s.app->parsed()) {
        name = s.app->get_name();
        s.options->apply(cfg);
      }
    }
    const std::string text = cfg.dump();
    status = print_config ? mmcr_resolve_config(name.c_str(), text.c_str(), &summary)
                          : mmcr_run(name.c_str(), text.c_str(), &summary);
  }

  if (status != MMCR_OK) {
    print_error(mmcr_status_name(status), static_cast<int>(status), mmcr_last_error());
    return status == MMCR_USAGE_ERROR ? kExitUsage : kExitRuntime;
  }
  std::cout << Json::parse(summary).dump(2) << '\n';
  mmcr_string_free(summary);
  return kExitOk;
}
