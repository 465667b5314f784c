/* SPDX-License-Identifier: Apache-2.0 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>

#include "mmcr/mmcr.h"

static int failures = 0;

#define EXPECT(cond)                                                       \
  do {                                                                     \
    if (!(cond)) {                                                         \
      fprintf(stderr, "%s:%d: EXPECT(%s) failed; last error: %s\n",        \
              __FILE__, __LINE__, #cond, mmcr_last_error());               \
      ++failures;                                                          \
    }                                                                      \
  } while (0)

#define EXPECT_NEAR(a, b, tol) EXPECT(fabs((a) - (b)) <= (tol))

static void test_numerics(void) {
  const double scores[3] = {0.5, 2.0, 0.2};
  double loss = 0.0;
  EXPECT(mmcr_ranking_loss(scores, 3, 0, 1.0, &loss) == MMCR_OK);
  EXPECT_NEAR(loss, 1.06667, 1e-5);
  EXPECT(mmcr_ranking_loss(scores, 3, 3, 1.0, &loss) == MMCR_INVALID_INPUT);
  EXPECT(strlen(mmcr_last_error()) > 0);
  EXPECT(mmcr_ranking_loss(NULL, 3, 0, 1.0, &loss) == MMCR_INVALID_INPUT);

  const double two[2] = {2.0, 0.0};
  double probs[2];
  EXPECT(mmcr_softmax(two, 2, probs) == MMCR_OK);
  EXPECT_NEAR(probs[0], 0.88080, 1e-5);

  const double pt[2] = {0.8, 0.2}, pi[2] = {0.2, 0.8};
  int index = -1;
  EXPECT(mmcr_ensemble(pt, pi, 2, 0.5, probs, &index) == MMCR_OK);
  EXPECT_NEAR(probs[0], 0.5, 1e-15);
  EXPECT(index == 0);
  EXPECT(mmcr_ensemble(pt, pi, 2, 0.0, probs, &index) == MMCR_OK);
  EXPECT(probs[0] == 0.8 && probs[1] == 0.2);
  EXPECT(mmcr_ensemble(pt, pi, 2, 2.0, probs, &index) == MMCR_INVALID_INPUT);

  const double a[3] = {1.0, 2.0, 3.0};
  double c = 0.0;
  EXPECT(mmcr_cosine(a, a, 3, &c) == MMCR_OK);
  EXPECT_NEAR(c, 1.0, 1e-12);
  EXPECT(mmcr_relevance(a, a, 3, &c) == MMCR_OK);
  EXPECT_NEAR(c, 100.0, 1e-6);

  EXPECT(strcmp(mmcr_status_name(MMCR_MISSING_IMAGE), "MissingImage") == 0);
  EXPECT(strlen(mmcr_version()) > 0);
}

static void test_scoring(const char* scratch) {
  mmcr_context* ctx = NULL;
  EXPECT(mmcr_context_create(NULL, 0, &ctx) == MMCR_OK);
  EXPECT(mmcr_context_text_dim(ctx) == 32);
  EXPECT(mmcr_context_visual_dim(ctx) == 32);

  const char* bad_spec[1] = {"text_scorer=gpt"};
  mmcr_context* bad = NULL;
  EXPECT(mmcr_context_create(bad_spec, 1, &bad) == MMCR_USAGE_ERROR);
  EXPECT(bad == NULL);

  mmcr_adapters* ad = NULL;
  EXPECT(mmcr_adapters_create(ctx, 16, 7, &ad) == MMCR_OK);
  EXPECT(mmcr_adapters_parameter_count(ad) > 0);
  char sum_a[65], sum_b[65];
  EXPECT(mmcr_adapters_checksum(ad, sum_a, sizeof sum_a) == MMCR_OK);
  EXPECT(strlen(sum_a) == 64);
  EXPECT(mmcr_adapters_checksum(ad, sum_b, 10) == MMCR_INVALID_INPUT);

  char path[1024];
  snprintf(path, sizeof path, "%s/adapters.ckpt", scratch);
  EXPECT(mmcr_adapters_save(ad, path) == MMCR_OK);
  mmcr_adapters* loaded = NULL;
  EXPECT(mmcr_adapters_load(path, &loaded) == MMCR_OK);
  EXPECT(mmcr_adapters_checksum(loaded, sum_b, sizeof sum_b) == MMCR_OK);
  EXPECT(strcmp(sum_a, sum_b) == 0);
  EXPECT(mmcr_adapters_load("/nonexistent/x.ckpt", &loaded) != MMCR_OK);

  const char* pair =
      "{\"id\": \"t1\", \"question\": \"Where do you keep milk?\", "
      "\"choices\": [\"in the fridge\", \"in the oven\", \"on the roof\"], \"answer_index\": 0}";
  char* scores = NULL;
  EXPECT(mmcr_score_pair(ctx, ad, pair, 1, &scores) == MMCR_OK);
  EXPECT(scores != NULL && strstr(scores, "\"lm\"") != NULL);
  mmcr_string_free(scores);

  char* pred = NULL;
  EXPECT(mmcr_predict(ctx, ad, pair, 0.0, &pred) == MMCR_OK);
  EXPECT(pred != NULL && strstr(pred, "\"predicted_index\"") != NULL);
  mmcr_string_free(pred);
  pred = NULL;
  /* No image and no generator store: the item is reported, not thrown. */
  EXPECT(mmcr_predict(ctx, ad, pair, 0.5, &pred) == MMCR_OK);
  EXPECT(pred != NULL && strstr(pred, "\"error\"") != NULL);
  mmcr_string_free(pred);

  EXPECT(mmcr_score_pair(ctx, ad, "{not json", 1, &scores) == MMCR_SCHEMA_ERROR);

  mmcr_adapters_destroy(loaded);
  mmcr_adapters_destroy(ad);
  mmcr_context_destroy(ctx);
}

static void test_commands(const char* scratch) {
  char* resolved = NULL;
  EXPECT(mmcr_resolve_config("eval", "{\"lambda\": 0.25}", &resolved) == MMCR_OK);
  EXPECT(resolved != NULL && strstr(resolved, "\"lambda\":0.25") != NULL);
  mmcr_string_free(resolved);
  EXPECT(mmcr_resolve_config("eval", "{\"lamda\": 0.25}", &resolved) == MMCR_USAGE_ERROR);
  EXPECT(mmcr_resolve_config("juggle", "{}", &resolved) == MMCR_USAGE_ERROR);

  char cfg[2048];
  snprintf(cfg, sizeof cfg, "{\"kb\": \"%s/kb_triples.jsonl\", \"out_dir\": \"%s/run\", \"seed\": 9}",
           MMCR_FIXTURE_DIR, scratch);
  char* summary = NULL;
  EXPECT(mmcr_run("build-dataset", cfg, &summary) == MMCR_OK);
  EXPECT(summary != NULL && strstr(summary, "run_manifest") != NULL);
  mmcr_string_free(summary);

  char manifest[1024];
  snprintf(manifest, sizeof manifest, "%s/run/build-dataset.manifest.json", scratch);
  EXPECT(mmcr_replay(manifest, NULL) == MMCR_OK);
  EXPECT(mmcr_replay("/nonexistent/m.json", NULL) == MMCR_IO_ERROR);
}

int main(void) {
  char scratch[512];
  snprintf(scratch, sizeof scratch, "%s/capi", MMCR_SCRATCH_DIR);
  mkdir(MMCR_SCRATCH_DIR, 0755);
  mkdir(scratch, 0755);

  test_numerics();
  test_scoring(scratch);
  test_commands(scratch);
  if (failures > 0) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
