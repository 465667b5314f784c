// SPDX-License-Identifier: Apache-2.0
#include "mmcr/mmcr.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "mmcr/backends/registry.hpp"
#include "mmcr/common/error.hpp"
#include "mmcr/dataset/types.hpp"
#include "mmcr/evaluation/analysis.hpp"
#include "mmcr/inference/inference.hpp"
#include "mmcr/pipeline/commands.hpp"
#include "mmcr/training/checkpoint.hpp"
#include "mmcr/training/loss.hpp"

struct mmcr_context {
  mmcr::Backends backends;
};

struct mmcr_adapters {
  mmcr::AdapterState state;
};

namespace {

thread_local std::string g_last_error;

mmcr_status to_status(mmcr::ErrorCode code) { return static_cast<mmcr_status>(static_cast<int>(code)); }

// Runs fn, translating exceptions into status codes and the thread's last
// error message. Nothing may escape across the C boundary.
template <typename Fn>
mmcr_status guarded(Fn&& fn) {
  try {
    fn();
    return MMCR_OK;
  } catch (const mmcr::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MMCR_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MMCR_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown exception";
    return MMCR_INTERNAL_ERROR;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require_arg(bool ok, const char* what) { mmcr::require(ok, mmcr::ErrorCode::InvalidInput, what); }

mmcr::Json parse_json(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return mmcr::Json::object();
  try {
    return mmcr::Json::parse(text);
  } catch (const mmcr::Json::exception& e) {
    mmcr::fail(mmcr::ErrorCode::SchemaError, std::string(what) + ": " + e.what());
  }
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

mmcr::VQAPair pair_of(const char* pair_json) {
  require_arg(pair_json != nullptr, "pair_json is null");
  auto pair = mmcr::pair_from_json(parse_json(pair_json, "pair"), mmcr::fs::current_path());
  mmcr::validate(pair.qa);
  return pair;
}

}  // namespace

extern "C" {

const char* mmcr_version(void) { return MMCR_VERSION_STRING; }

const char* mmcr_status_name(mmcr_status status) {
  if (status == MMCR_OK) return "Ok";
  if (status == MMCR_INTERNAL_ERROR) return "InternalError";
  const auto name = mmcr::to_string(static_cast<mmcr::ErrorCode>(status));
  return name.empty() ? "Unknown" : name.data();
}

const char* mmcr_last_error(void) { return g_last_error.c_str(); }

void mmcr_string_free(char* s) { std::free(s); }

mmcr_status mmcr_resolve_config(const char* subcommand, const char* config_json, char** resolved_json) {
  return guarded([&] {
    require_arg(subcommand != nullptr && resolved_json != nullptr, "null argument");
    const auto cfg = mmcr::resolve_config(subcommand, parse_json(config_json, "config"), process_env);
    *resolved_json = dup_string(cfg.dump());
  });
}

mmcr_status mmcr_run(const char* subcommand, const char* config_json, char** summary_json) {
  return guarded([&] {
    require_arg(subcommand != nullptr, "subcommand is null");
    const auto cfg = mmcr::resolve_config(subcommand, parse_json(config_json, "config"), process_env);
    const auto outcome = mmcr::run_command(subcommand, cfg);
    if (summary_json != nullptr) *summary_json = dup_string(outcome.summary.dump());
  });
}

mmcr_status mmcr_replay(const char* manifest_path, char** summary_json) {
  return guarded([&] {
    require_arg(manifest_path != nullptr, "manifest path is null");
    const auto outcome = mmcr::replay_manifest(manifest_path);
    if (summary_json != nullptr) *summary_json = dup_string(outcome.summary.dump());
  });
}

mmcr_status mmcr_context_create(const char* const* specs, size_t n_specs, mmcr_context** out) {
  return guarded([&] {
    require_arg(out != nullptr && (specs != nullptr || n_specs == 0), "null argument");
    std::vector<std::string> list;
    for (size_t i = 0; i < n_specs; ++i) {
      require_arg(specs[i] != nullptr, "null backend spec");
      list.emplace_back(specs[i]);
    }
    auto ctx = std::make_unique<mmcr_context>();
    ctx->backends = mmcr::make_backends(mmcr::resolve_backends(list, process_env));
    *out = ctx.release();
  });
}

void mmcr_context_destroy(mmcr_context* ctx) { delete ctx; }

size_t mmcr_context_text_dim(const mmcr_context* ctx) {
  return ctx && ctx->backends.text ? ctx->backends.text->feature_dim() : 0;
}

size_t mmcr_context_visual_dim(const mmcr_context* ctx) {
  return ctx && ctx->backends.vision ? ctx->backends.vision->feature_dim() : 0;
}

mmcr_status mmcr_adapters_create(const mmcr_context* ctx, int reduction_factor, uint64_t seed, mmcr_adapters** out) {
  return guarded([&] {
    require_arg(ctx != nullptr && out != nullptr, "null argument");
    auto a = std::make_unique<mmcr_adapters>();
    a->state = mmcr::AdapterState::initialize(ctx->backends.text->feature_dim(), ctx->backends.vision->feature_dim(),
                                              reduction_factor, seed);
    *out = a.release();
  });
}

mmcr_status mmcr_adapters_load(const char* path, mmcr_adapters** out) {
  return guarded([&] {
    require_arg(path != nullptr && out != nullptr, "null argument");
    auto a = std::make_unique<mmcr_adapters>();
    a->state = mmcr::load_checkpoint(path).state;
    *out = a.release();
  });
}

mmcr_status mmcr_adapters_save(const mmcr_adapters* adapters, const char* path) {
  return guarded([&] {
    require_arg(adapters != nullptr && path != nullptr, "null argument");
    mmcr::save_checkpoint(path, adapters->state, mmcr::Json::object());
  });
}

size_t mmcr_adapters_parameter_count(const mmcr_adapters* adapters) {
  return adapters ? adapters->state.trainable_count() : 0;
}

mmcr_status mmcr_adapters_checksum(const mmcr_adapters* adapters, char* buf, size_t buf_size) {
  return guarded([&] {
    require_arg(adapters != nullptr && buf != nullptr, "null argument");
    const auto sum = adapters->state.checksum();
    require_arg(buf_size > sum.size(), "checksum buffer too small");
    std::memcpy(buf, sum.c_str(), sum.size() + 1);
  });
}

void mmcr_adapters_destroy(mmcr_adapters* adapters) { delete adapters; }

mmcr_status mmcr_score_pair(const mmcr_context* ctx, const mmcr_adapters* adapters, const char* pair_json,
                            int text_only, char** scores_json) {
  return guarded([&] {
    require_arg(ctx != nullptr && scores_json != nullptr, "null argument");
    const auto pair = pair_of(pair_json);
    if (adapters) mmcr::check_compatible(adapters->state, ctx->backends);
    mmcr::ScoreOptions opts;
    opts.text_only = text_only != 0;
    const auto s = mmcr::score_choices(pair, ctx->backends, adapters ? &adapters->state : nullptr, opts);
    mmcr::OrderedJson j;
    j["id"] = pair.qa.id;
    j["lm"] = s.lm;
    if (s.itm_available) {
      j["itm"] = s.itm;
      j["joint"] = s.joint;
    }
    j["errors"] = s.errors;
    *scores_json = dup_string(j.dump());
  });
}

mmcr_status mmcr_predict(const mmcr_context* ctx, const mmcr_adapters* adapters, const char* pair_json, double lambda,
                         char** prediction_json) {
  return guarded([&] {
    require_arg(ctx != nullptr && prediction_json != nullptr, "null argument");
    const auto pair = pair_of(pair_json);
    if (adapters) mmcr::check_compatible(adapters->state, ctx->backends);
    mmcr::EnsembleConfig cfg{lambda};
    cfg.validate();
    const auto p = mmcr::predict(pair, adapters ? &adapters->state : nullptr, ctx->backends, cfg);
    *prediction_json = dup_string(p.to_json().dump());
  });
}

mmcr_status mmcr_softmax(const double* scores, size_t n, double* probs_out) {
  return guarded([&] {
    require_arg(scores != nullptr && probs_out != nullptr, "null argument");
    const auto p = mmcr::softmax({scores, n});
    std::copy(p.begin(), p.end(), probs_out);
  });
}

mmcr_status mmcr_ensemble(const double* p_text, const double* p_itm, size_t n, double lambda, double* probs_out,
                          int* predicted_index) {
  return guarded([&] {
    require_arg(p_text != nullptr && p_itm != nullptr && probs_out != nullptr, "null argument");
    const auto pred = mmcr::ensemble({p_text, n}, {p_itm, n}, lambda);
    std::copy(pred.probs.begin(), pred.probs.end(), probs_out);
    if (predicted_index) *predicted_index = pred.predicted_index;
  });
}

mmcr_status mmcr_ranking_loss(const double* scores, size_t n, int gold, double margin, double* loss_out) {
  return guarded([&] {
    require_arg(scores != nullptr && loss_out != nullptr, "null argument");
    *loss_out = mmcr::ranking_loss({scores, n}, gold, margin);
  });
}

mmcr_status mmcr_cosine(const double* a, const double* b, size_t n, double* out) {
  return guarded([&] {
    require_arg(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = mmcr::cosine({a, n}, {b, n});
  });
}

mmcr_status mmcr_relevance(const double* a, const double* b, size_t n, double* out) {
  return guarded([&] {
    require_arg(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = mmcr::relevance({a, n}, {b, n});
  });
}

}  // extern "C"
