/* SPDX-License-Identifier: Apache-2.0 */
#ifndef MMCR_MMCR_H_
#define MMCR_MMCR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MMCR_API __declspec(dllexport)
#else
#define MMCR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values are stable across releases. */
typedef enum mmcr_status {
  MMCR_OK = 0,
  MMCR_INVALID_INPUT = 1,
  MMCR_MISSING_IMAGE = 2,
  MMCR_STORAGE_ERROR = 3,
  MMCR_UNKNOWN_RELATION = 4,
  MMCR_POOL_EXHAUSTED = 5,
  MMCR_SCHEMA_ERROR = 6,
  MMCR_GENERATION_ERROR = 7,
  MMCR_DIMENSION_ERROR = 8,
  MMCR_CHANNEL_MISSING = 9,
  MMCR_NUMERICAL_ERROR = 10,
  MMCR_ALIGNMENT_ERROR = 11,
  MMCR_IO_ERROR = 12,
  MMCR_USAGE_ERROR = 13,
  MMCR_INTERNAL_ERROR = 100
} mmcr_status;

typedef struct mmcr_context mmcr_context;   /* configured backends */
typedef struct mmcr_adapters mmcr_adapters; /* trainable adapter state */

MMCR_API const char* mmcr_version(void);
MMCR_API const char* mmcr_status_name(mmcr_status status);

/* Message of the last failed call on the calling thread; "" if none. The
   pointer stays valid until the next failing call on the same thread. */
MMCR_API const char* mmcr_last_error(void);

/* Strings returned through char** out-parameters are owned by the caller. */
MMCR_API void mmcr_string_free(char* s);

/* Subcommands ----------------------------------------------------------- */

/* Fills defaults for `subcommand` ("build-dataset", "score", "train", "eval",
   "sweep", "analyze", "visualize") from a partial JSON object and returns
   the resolved config. Backend specs fall back to MMCR_BACKEND_<KIND>. */
MMCR_API mmcr_status mmcr_resolve_config(const char* subcommand, const char* config_json, char** resolved_json);

/* Resolves and runs a subcommand, writing its run manifest. `summary_json`
   receives the command's summary (may be NULL). */
MMCR_API mmcr_status mmcr_run(const char* subcommand, const char* config_json, char** summary_json);

/* Re-runs the subcommand recorded in a run manifest. */
MMCR_API mmcr_status mmcr_replay(const char* manifest_path, char** summary_json);

/* Backends -------------------------------------------------------------- */

/* `specs` are "kind=name[:key=value,...]" strings; kinds not listed use the
   stub defaults. */
MMCR_API mmcr_status mmcr_context_create(const char* const* specs, size_t n_specs, mmcr_context** out);
MMCR_API void mmcr_context_destroy(mmcr_context* ctx);
MMCR_API size_t mmcr_context_text_dim(const mmcr_context* ctx);
MMCR_API size_t mmcr_context_visual_dim(const mmcr_context* ctx);

/* Adapters -------------------------------------------------------------- */

MMCR_API mmcr_status mmcr_adapters_create(const mmcr_context* ctx, int reduction_factor, uint64_t seed,
                                          mmcr_adapters** out);
MMCR_API mmcr_status mmcr_adapters_load(const char* path, mmcr_adapters** out);
MMCR_API mmcr_status mmcr_adapters_save(const mmcr_adapters* adapters, const char* path);
MMCR_API size_t mmcr_adapters_parameter_count(const mmcr_adapters* adapters);
/* Writes the 64-hex-digit sha256 of every parameter plus NUL (buf_size >= 65). */
MMCR_API mmcr_status mmcr_adapters_checksum(const mmcr_adapters* adapters, char* buf, size_t buf_size);
MMCR_API void mmcr_adapters_destroy(mmcr_adapters* adapters);

/* Scoring --------------------------------------------------------------- */

/* `pair_json` is one line of the normalized dataset format. `adapters` may
   be NULL. Returns {"lm":[...],"itm":[...],"joint":[...],"errors":[...]}. */
MMCR_API mmcr_status mmcr_score_pair(const mmcr_context* ctx, const mmcr_adapters* adapters, const char* pair_json,
                                     int text_only, char** scores_json);

/* Returns {"id","probs","predicted_index","p_text","p_itm"?} or
   {"id","error"} for an item that could not be scored. */
MMCR_API mmcr_status mmcr_predict(const mmcr_context* ctx, const mmcr_adapters* adapters, const char* pair_json,
                                  double lambda, char** prediction_json);

/* Numerics -------------------------------------------------------------- */

MMCR_API mmcr_status mmcr_softmax(const double* scores, size_t n, double* probs_out);
MMCR_API mmcr_status mmcr_ensemble(const double* p_text, const double* p_itm, size_t n, double lambda,
                                   double* probs_out, int* predicted_index);
MMCR_API mmcr_status mmcr_ranking_loss(const double* scores, size_t n, int gold, double margin, double* loss_out);
MMCR_API mmcr_status mmcr_cosine(const double* a, const double* b, size_t n, double* out);
MMCR_API mmcr_status mmcr_relevance(const double* a, const double* b, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* MMCR_MMCR_H_ */
