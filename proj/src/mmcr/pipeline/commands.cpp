// SPDX-License-Identifier: Apache-2.0
#include "mmcr/pipeline/commands.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <memory>

#include "mmcr/backends/registry.hpp"
#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"
#include "mmcr/common/log.hpp"
#include "mmcr/dataset/builder.hpp"
#include "mmcr/dataset/image_store.hpp"
#include "mmcr/dataset/vcr.hpp"
#include "mmcr/evaluation/analysis.hpp"
#include "mmcr/evaluation/benchmark.hpp"
#include "mmcr/inference/inference.hpp"
#include "mmcr/pipeline/plots.hpp"
#include "mmcr/training/checkpoint.hpp"
#include "mmcr/training/trainer.hpp"

namespace mmcr {

namespace {

constexpr int kManifestSchemaVersion = 1;

// Keys holding input files; their digests go into the manifest.
const std::vector<std::string> kInputKeys{"data", "kb", "vcr", "adapters", "init", "templates", "names", "input"};
// Keys holding paths, made absolute during resolution.
const std::vector<std::string> kPathKeys{"data",   "kb",     "vcr",    "adapters", "init",   "templates",
                                         "names",  "input",  "out",    "report",   "images", "out_dir"};

OrderedJson data_source_defaults() {
  return {{"data", ""},      {"benchmark", ""},   {"format", ""},      {"adapters", ""},
          {"scoring_mode", ""}, {"images", ""},    {"resolution", 384}, {"steps", 50}};
}

void merge(OrderedJson& into, const OrderedJson& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

bool same_kind(const Json& a, const OrderedJson& b) {
  if (b.is_boolean()) return a.is_boolean();
  if (b.is_number_integer()) return a.is_number_integer();
  if (b.is_number()) return a.is_number();
  if (b.is_string()) return a.is_string();
  if (b.is_array()) return a.is_array();
  return false;
}

std::string kind_name(const OrderedJson& v) {
  if (v.is_boolean()) return "a boolean";
  if (v.is_number_integer()) return "an integer";
  if (v.is_number()) return "a number";
  if (v.is_string()) return "a string";
  return "a list";
}

fs::path path_of(const OrderedJson& cfg, const char* key) { return fs::path(cfg.at(key).get<std::string>()); }

fs::path normalized_absolute(const fs::path& p) {
  fs::path n = fs::absolute(p).lexically_normal();
  if (!n.has_filename() && n != n.root_path()) n = n.parent_path();
  return n;
}

std::string timestamp_utc(std::chrono::system_clock::time_point t) {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(t)));
}

Backends backends_of(const OrderedJson& cfg) {
  std::vector<BackendDescriptor> ds;
  for (const auto& s : cfg.at("backends")) ds.push_back(parse_backend_spec(s.get<std::string>()));
  return make_backends(ds);
}

ScoringMode scoring_mode_of(const OrderedJson& cfg, const Backends& backends) {
  const auto m = cfg.at("scoring_mode").get<std::string>();
  return m.empty() ? backends.text->default_mode() : parse_scoring_mode(m);
}

std::optional<AdapterState> adapters_of(const OrderedJson& cfg, const Backends& backends) {
  const auto p = path_of(cfg, "adapters");
  if (p.empty()) return std::nullopt;
  Checkpoint ckpt = load_checkpoint(p);
  check_compatible(ckpt.state, backends);
  return std::move(ckpt.state);
}

// Pairs for scoring commands: our normalized dataset files, or a public
// benchmark through its format adapter. A dataset directory resolves to
// `default_split`.jsonl inside it.
std::vector<VQAPair> load_items(const OrderedJson& cfg, const std::string& default_split) {
  fs::path data = path_of(cfg, "data");
  require(!data.empty(), ErrorCode::UsageError, "--data is required");
  const auto benchmark = cfg.at("benchmark").get<std::string>();
  const auto format = cfg.at("format").get<std::string>();
  if (benchmark.empty() && format.empty()) {
    if (fs::is_directory(data)) data /= default_split + ".jsonl";
    require(fs::exists(data), ErrorCode::IoError, "data file not found: " + data.string());
    return read_pairs(data);
  }
  BenchmarkSpec spec;
  const auto known = known_benchmark_names();
  if (!benchmark.empty() && std::find(known.begin(), known.end(), benchmark) != known.end()) {
    spec = known_benchmark(benchmark, {{"dev", data}});
  } else {
    spec = {benchmark.empty() ? "custom" : benchmark, format.empty() ? "normalized" : format, 0, {{"dev", data}}};
  }
  if (!format.empty()) spec.format = format;
  std::vector<VQAPair> out;
  for (auto& qa : load_benchmark(spec, "dev")) out.push_back(VQAPair{std::move(qa), std::nullopt, std::nullopt});
  return out;
}

// Generates missing images through the content-addressed store. Items whose
// generation fails keep no image and surface later as per-item errors.
std::size_t ensure_images(std::vector<VQAPair>& pairs, const OrderedJson& cfg, const Backends& backends) {
  const bool missing = std::any_of(pairs.begin(), pairs.end(), [](const VQAPair& p) { return !p.image; });
  if (!missing) return 0;
  ImageStore store(path_of(cfg, "images"), backends.generator);
  const auto res = cfg.at("resolution").get<std::uint32_t>();
  const auto steps = cfg.at("steps").get<std::uint32_t>();
  std::size_t failed = 0;
  for (auto& p : pairs) {
    if (p.image) continue;
    try {
      p.image = attach_image(p.qa, store, res, steps).image;
    } catch (const Error& e) {
      log::get().warn("image generation failed for {}: {}", p.qa.id, e.what());
      ++failed;
    }
  }
  return failed;
}

OrderedJson scores_to_json(const ScoredItem& s) {
  OrderedJson j;
  j["id"] = s.id;
  j["gold"] = s.gold;
  j["lm"] = s.scores.lm;
  if (s.scores.itm_available) {
    j["itm"] = s.scores.itm;
    j["joint"] = s.scores.joint;
  }
  if (!s.scores.ok()) j["errors"] = s.scores.errors;
  return j;
}

void write_jsonl(const fs::path& path, const std::vector<OrderedJson>& rows) {
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

void write_report(const fs::path& path, const OrderedJson& report) {
  fs::create_directories(path.parent_path());
  write_file_atomic(path, pretty_json(report));
}

struct Run {
  OrderedJson summary;
  std::vector<fs::path> outputs;
};

Run run_build_dataset(const OrderedJson& cfg, const Backends& backends) {
  BuildConfig bc;
  bc.kb_path = path_of(cfg, "kb");
  bc.vcr_path = path_of(cfg, "vcr");
  require(!bc.kb_path.empty() || !bc.vcr_path.empty(), ErrorCode::UsageError, "give --kb and/or --vcr");
  bc.out_dir = path_of(cfg, "out");
  bc.resolution = cfg.at("resolution").get<std::uint32_t>();
  bc.steps = cfg.at("steps").get<std::uint32_t>();
  bc.seed = cfg.at("seed").get<std::uint64_t>();
  bc.dev_fraction = cfg.at("dev_fraction").get<double>();
  bc.distractors = cfg.at("distractors").get<int>();
  if (const auto t = path_of(cfg, "templates"); !t.empty()) bc.templates = load_templates(Json::parse(read_text_file(t)));
  if (const auto n = path_of(cfg, "names"); !n.empty()) bc.name_lexicon = load_name_lexicon(n);
  for (const auto& n : cfg.at("neutral_names")) bc.neutral_names.push_back(n.get<std::string>());

  const BuildReport r = build_dataset(bc, backends);
  Run run;
  run.summary["dataset_manifest"] = r.manifest.to_json();
  run.summary["generator_calls"] = r.generator_calls;
  run.summary["cache_hits"] = r.cache_hits;
  run.summary["unique_prompts"] = r.unique_prompts;
  run.outputs = {bc.out_dir / "train.jsonl", bc.out_dir / "dev.jsonl", bc.out_dir / "manifest.json",
                 bc.out_dir / "images"};
  return run;
}

Run run_score(const OrderedJson& cfg, const Backends& backends) {
  auto pairs = load_items(cfg, "dev");
  const bool text_only = cfg.at("text_only").get<bool>();
  if (!text_only) ensure_images(pairs, cfg, backends);
  const auto adapters = adapters_of(cfg, backends);
  ScoreOptions opts{scoring_mode_of(cfg, backends), text_only};
  const auto scored = score_items(pairs, backends, adapters ? &*adapters : nullptr, opts);
  std::vector<OrderedJson> rows;
  std::size_t failed = 0;
  for (const auto& s : scored) {
    rows.push_back(scores_to_json(s));
    failed += !s.scores.ok();
  }
  const auto out = path_of(cfg, "out");
  write_jsonl(out, rows);
  Run run;
  run.summary = {{"items", scored.size()}, {"items_with_errors", failed}, {"scores", out.string()}};
  run.outputs = {out};
  return run;
}

Run run_train(const OrderedJson& cfg, const Backends& backends) {
  auto pairs = load_items(cfg, "train");
  const std::size_t failed = ensure_images(pairs, cfg, backends);
  std::erase_if(pairs, [](const VQAPair& p) { return !p.image; });
  if (failed > 0) log::get().warn("{} training items dropped after image generation failures", failed);

  const ScoringMode mode = scoring_mode_of(cfg, backends);
  TrainableModel model(backends, mode);
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  AdapterState state;
  if (const auto init = path_of(cfg, "init"); !init.empty()) {
    state = load_checkpoint(init).state;
    check_compatible(state, backends);
  } else {
    state = AdapterState::initialize(backends.text->feature_dim(), backends.vision->feature_dim(),
                                     cfg.at("reduction_factor").get<int>(), seed);
    if (cfg.at("full_finetune").get<bool>()) enable_full_finetuning(state, model);
  }
  TrainConfig tc;
  tc.batch_size = cfg.at("batch").get<std::size_t>();
  tc.learning_rate = cfg.at("lr").get<double>();
  tc.epochs = cfg.at("epochs").get<int>();
  tc.max_steps = cfg.at("max_steps").get<std::size_t>();
  tc.seed = seed;
  RankingConfig rc;
  rc.margin = cfg.at("margin").get<double>();
  rc.channels.clear();
  for (const auto& c : cfg.at("channels")) rc.channels.push_back(parse_channel(c.get<std::string>()));

  const TrainReport report = train(pairs, state, model, tc, rc);
  const auto out = path_of(cfg, "out");
  fs::create_directories(out.parent_path());
  save_checkpoint(out, state, cfg);
  OrderedJson rj = report.to_json();
  rj["schema_version"] = kReportSchemaVersion;
  rj["kind"] = "train";
  rj["items"] = pairs.size();
  rj["dropped_items"] = failed;
  rj["checkpoint"] = out.string();
  const auto report_path = path_of(cfg, "report");
  write_report(report_path, rj);
  Run run;
  run.summary = rj;
  run.outputs = {out, report_path};
  return run;
}

EnsembleConfig ensemble_of(const OrderedJson& cfg) {
  EnsembleConfig ec{cfg.at("lambda").get<double>(), parse_text_channel(cfg.at("text_channel").get<std::string>())};
  ec.validate();
  return ec;
}

Run run_eval(const OrderedJson& cfg, const Backends& backends) {
  auto pairs = load_items(cfg, "dev");
  const EnsembleConfig ec = ensemble_of(cfg);
  const bool need_itm = ec.lambda > 0.0 || ec.text_channel == TextChannel::Joint;
  if (need_itm) ensure_images(pairs, cfg, backends);
  const auto adapters = adapters_of(cfg, backends);
  const auto scored = score_items(pairs, backends, adapters ? &*adapters : nullptr,
                                  ScoreOptions{scoring_mode_of(cfg, backends), !need_itm});
  std::vector<Prediction> preds;
  std::vector<OrderedJson> rows;
  for (const auto& s : scored) {
    preds.push_back(predict_from_scores(s.id, s.scores, ec));
    rows.push_back(preds.back().to_json());
  }
  const auto acc = accuracy(preds, golds_of(pairs));
  const auto out = path_of(cfg, "out");
  write_jsonl(out, rows);
  OrderedJson report;
  report["schema_version"] = kReportSchemaVersion;
  report["kind"] = "eval";
  report["lambda"] = ec.lambda;
  report["text_channel"] = to_string(ec.text_channel);
  report["accuracy"] = acc.accuracy;
  report["correct"] = acc.correct;
  report["total"] = acc.total;
  report["excluded_count"] = acc.excluded;
  report["predictions"] = out.string();
  const auto report_path = path_of(cfg, "report");
  write_report(report_path, report);
  return {report, {out, report_path}};
}

Run run_sweep(const OrderedJson& cfg, const Backends& backends) {
  auto pairs = load_items(cfg, "dev");
  ensure_images(pairs, cfg, backends);
  const auto adapters = adapters_of(cfg, backends);
  const auto grid = parse_grid(cfg.at("grid").get<std::string>());
  const auto channel = parse_text_channel(cfg.at("text_channel").get<std::string>());
  const auto scored = score_items(pairs, backends, adapters ? &*adapters : nullptr,
                                  ScoreOptions{scoring_mode_of(cfg, backends), false});
  const SweepResult r = sweep_lambda(scored, grid, channel);
  const auto out = path_of(cfg, "out");
  fs::create_directories(out.parent_path());
  write_file_atomic(out, r.to_csv());
  OrderedJson report;
  report["schema_version"] = kReportSchemaVersion;
  report["kind"] = "sweep";
  report["text_channel"] = to_string(channel);
  merge(report, r.to_json());
  report["csv"] = out.string();
  const auto report_path = path_of(cfg, "report");
  write_report(report_path, report);
  return {report, {out, report_path}};
}

Run run_analyze(const OrderedJson& cfg, const Backends& backends) {
  auto pairs = load_items(cfg, "dev");
  const auto limit = cfg.at("limit").get<std::size_t>();
  if (limit > 0 && pairs.size() > limit) pairs.resize(limit);
  ensure_images(pairs, cfg, backends);
  const auto adapters = adapters_of(cfg, backends);
  const AdapterState* ad = adapters ? &*adapters : nullptr;
  const auto analysis = cfg.at("analysis").get<std::string>();
  const auto benchmark = cfg.at("benchmark").get<std::string>();
  const auto out = path_of(cfg, "out");
  Run run;
  if (analysis == "helpful-harmful") {
    const EnsembleConfig ec = ensemble_of(cfg);
    const auto scored = score_items(pairs, backends, ad, ScoreOptions{scoring_mode_of(cfg, backends), false});
    const AnalysisReport r = helpful_harmful(scored, ec.lambda, ec.text_channel, benchmark);
    OrderedJson report = helpful_harmful_table({r});
    report["lambda"] = ec.lambda;
    report["items"] = r.to_json()["flips"];
    write_report(out, report);
    run.summary = helpful_harmful_table({r});
  } else if (analysis == "relevance") {
    const RelevanceReport r = relevance_report(pairs, backends, ad, benchmark);
    write_report(out, r.to_json());
    run.summary = {{"dataset", r.dataset}, {"mean_relevance", r.mean_relevance}, {"evaluated", r.evaluated},
                   {"excluded_count", r.excluded_count}};
  } else if (analysis == "attention") {
    const auto erase = cfg.at("erase").get<std::size_t>();
    const fs::path art = out.parent_path() / "attention";
    OrderedJson items = OrderedJson::array();
    std::size_t failed = 0;
    for (const auto& p : pairs) {
      try {
        const ErasureResult r = attention_erasure(p, ad, backends, erase, art);
        items.push_back({{"id", p.qa.id},
                         {"image", r.image_path.string()},
                         {"original", r.original_path.string()},
                         {"sidecar", r.sidecar_path.string()},
                         {"surviving", r.surviving.size()}});
        run.outputs.push_back(r.image_path);
        run.outputs.push_back(r.sidecar_path);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidInput) throw;
        log::get().warn("attention erasure failed for {}: {}", p.qa.id, e.what());
        ++failed;
      }
    }
    OrderedJson report{{"schema_version", kReportSchemaVersion}, {"kind", "attention"}, {"erase_count", erase},
                       {"evaluated", items.size()}, {"excluded_count", failed}, {"items", items}};
    write_report(out, report);
    run.summary = {{"evaluated", items.size()}, {"excluded_count", failed}, {"artifacts", art.string()}};
  } else {
    fail(ErrorCode::UsageError, "unknown analysis mode: " + analysis +
                                    " (expected helpful-harmful, relevance or attention)");
  }
  run.summary["report"] = out.string();
  run.outputs.insert(run.outputs.begin(), out);
  return run;
}

Run run_visualize(const OrderedJson& cfg) {
  const auto input = path_of(cfg, "input");
  require(!input.empty(), ErrorCode::UsageError, "--input is required");
  Run run;
  run.outputs = emit_plots(input, path_of(cfg, "out"));
  run.summary["plots"] = OrderedJson::array();
  for (const auto& p : run.outputs) run.summary["plots"].push_back(p.string());
  return run;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"build-dataset", "score", "train", "eval",
                                              "sweep",         "analyze", "visualize"};
  return names;
}

OrderedJson command_defaults(const std::string& command) {
  OrderedJson d{{"seed", kDefaultSeed}, {"backends", Json::array()}, {"out_dir", "."}, {"log_level", "warn"}};
  if (command == "build-dataset") {
    merge(d, {{"kb", ""}, {"vcr", ""}, {"out", ""}, {"templates", ""}, {"names", ""},
              {"neutral_names", Json::array()}, {"resolution", 384}, {"steps", 50}, {"dev_fraction", 0.1},
              {"distractors", 2}});
  } else if (command == "score") {
    merge(d, data_source_defaults());
    merge(d, {{"text_only", false}, {"out", ""}});
  } else if (command == "train") {
    merge(d, data_source_defaults());
    d.erase("adapters");
    merge(d, {{"margin", 1.0}, {"batch", 32}, {"lr", 1e-5}, {"epochs", 2}, {"max_steps", 0},
              {"channels", {"lm", "itm", "joint"}}, {"reduction_factor", 16}, {"full_finetune", false},
              {"init", ""}, {"out", ""}, {"report", ""}});
  } else if (command == "eval") {
    merge(d, data_source_defaults());
    merge(d, {{"lambda", 0.5}, {"text_channel", "lm"}, {"out", ""}, {"report", ""}});
  } else if (command == "sweep") {
    merge(d, data_source_defaults());
    merge(d, {{"grid", "0:1:0.05"}, {"text_channel", "lm"}, {"out", ""}, {"report", ""}});
  } else if (command == "analyze") {
    merge(d, data_source_defaults());
    merge(d, {{"analysis", "helpful-harmful"}, {"lambda", 0.5}, {"text_channel", "lm"}, {"erase", 100},
              {"limit", 0}, {"out", ""}});
  } else if (command == "visualize") {
    merge(d, {{"input", ""}, {"out", ""}});
  } else {
    fail(ErrorCode::UsageError, "unknown subcommand: " + command);
  }
  return d;
}

OrderedJson resolve_config(const std::string& command, const Json& partial, const EnvLookup& getenv) {
  OrderedJson cfg = command_defaults(command);
  require(partial.is_object() || partial.is_null(), ErrorCode::UsageError, "config must be a JSON object");
  if (partial.is_object()) {
    for (const auto& [key, value] : partial.items()) {
      require(cfg.contains(key), ErrorCode::UsageError, fmt::format("{} does not accept option '{}'", command, key));
      const bool ok = same_kind(value, cfg[key]) || (cfg[key].is_number_integer() && value.is_number_unsigned());
      require(ok, ErrorCode::UsageError, fmt::format("option '{}' must be {}", key, kind_name(cfg[key])));
      cfg[key] = value;
    }
  }
  for (const char* key : {"resolution", "steps", "batch", "epochs", "max_steps", "reduction_factor", "erase",
                          "limit", "distractors", "seed"}) {
    if (cfg.contains(key)) {
      require(cfg[key].get<std::int64_t>() >= 0, ErrorCode::UsageError,
              fmt::format("option '{}' must not be negative", key));
    }
  }

  const fs::path out_dir = normalized_absolute(path_of(cfg, "out_dir"));
  cfg["out_dir"] = out_dir.string();
  auto fill = [&](const char* key, const fs::path& rel) {
    if (cfg.contains(key) && cfg[key].get<std::string>().empty()) cfg[key] = (out_dir / rel).string();
  };
  static const std::map<std::string, std::pair<std::string, std::string>> outputs{
      {"build-dataset", {"dataset", ""}},
      {"score", {"scores.jsonl", ""}},
      {"train", {"adapters.ckpt", "train_report.json"}},
      {"eval", {"predictions.jsonl", "eval_report.json"}},
      {"sweep", {"sweep.csv", "sweep.json"}},
      {"analyze", {"report.json", ""}},
      {"visualize", {"plots", ""}},
  };
  fill("out", outputs.at(command).first);
  if (!outputs.at(command).second.empty()) fill("report", outputs.at(command).second);
  fill("images", "images");
  for (const auto& key : kPathKeys) {
    if (cfg.contains(key) && !cfg[key].get<std::string>().empty()) {
      cfg[key] = normalized_absolute(path_of(cfg, key.c_str())).string();
    }
  }

  std::vector<std::string> specs;
  for (const auto& s : cfg["backends"]) specs.push_back(s.get<std::string>());
  OrderedJson resolved = OrderedJson::array();
  // Instantiating fills every backend default into the descriptors.
  for (const auto& d : make_backends(resolve_backends(specs, getenv)).descriptors()) resolved.push_back(d.to_spec());
  cfg["backends"] = resolved;
  if (cfg.contains("scoring_mode") && !cfg["scoring_mode"].get<std::string>().empty()) {
    parse_scoring_mode(cfg["scoring_mode"].get<std::string>());
  }
  return cfg;
}

std::string digest_path(const fs::path& path) {
  require(fs::exists(path), ErrorCode::IoError, "cannot digest missing path " + path.string());
  if (!fs::is_directory(path)) return sha256_hex(read_text_file(path));
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (!e.is_regular_file()) continue;
    entries.emplace_back(fs::relative(e.path(), path).generic_string(), sha256_hex(read_text_file(e.path())));
  }
  std::sort(entries.begin(), entries.end());
  std::string listing;
  for (const auto& [rel, digest] : entries) listing += rel + '\t' + digest + '\n';
  return sha256_hex(listing);
}

CommandOutcome run_command(const std::string& command, const OrderedJson& resolved) {
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  log::set_level(resolved.at("log_level").get<std::string>());

  OrderedJson digests = OrderedJson::object();
  for (const auto& key : kInputKeys) {
    if (resolved.contains(key) && !resolved[key].get<std::string>().empty()) {
      digests[key] = digest_path(path_of(resolved, key.c_str()));
    }
  }

  Run run;
  if (command == "visualize") {
    run = run_visualize(resolved);
  } else {
    const Backends backends = backends_of(resolved);
    if (command == "build-dataset") run = run_build_dataset(resolved, backends);
    else if (command == "score") run = run_score(resolved, backends);
    else if (command == "train") run = run_train(resolved, backends);
    else if (command == "eval") run = run_eval(resolved, backends);
    else if (command == "sweep") run = run_sweep(resolved, backends);
    else if (command == "analyze") run = run_analyze(resolved, backends);
    else fail(ErrorCode::UsageError, "unknown subcommand: " + command);
  }

  OrderedJson manifest;
  manifest["schema_version"] = kManifestSchemaVersion;
  manifest["subcommand"] = command;
  manifest["tool_version"] = MMCR_VERSION_STRING;
  manifest["seed"] = resolved.at("seed");
  manifest["config"] = resolved;
  manifest["input_digests"] = digests;
  manifest["outputs"] = OrderedJson::array();
  for (const auto& p : run.outputs) manifest["outputs"].push_back(p.string());
  manifest["started_at"] = timestamp_utc(started);
  manifest["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  CommandOutcome outcome;
  outcome.manifest_path = path_of(resolved, "out_dir") / (command + ".manifest.json");
  write_report(outcome.manifest_path, manifest);
  outcome.summary = std::move(run.summary);
  outcome.summary["run_manifest"] = outcome.manifest_path.string();
  return outcome;
}

CommandOutcome replay_manifest(const fs::path& manifest) {
  require(fs::exists(manifest), ErrorCode::IoError, "manifest not found: " + manifest.string());
  OrderedJson m;
  try {
    m = OrderedJson::parse(read_text_file(manifest));
  } catch (const OrderedJson::exception& e) {
    fail(ErrorCode::SchemaError, manifest.string() + ": " + e.what());
  }
  require(m.is_object() && m.contains("subcommand") && m.contains("config") && m["config"].is_object(),
          ErrorCode::SchemaError, manifest.string() + ": not a run manifest");
  const auto command = m["subcommand"].get<std::string>();
  // The recorded config is already resolved; re-resolving only re-checks it.
  const auto cfg = resolve_config(command, Json::parse(m["config"].dump()),
                                  [](const std::string&) { return std::optional<std::string>{}; });
  return run_command(command, cfg);
}

}  // namespace mmcr
