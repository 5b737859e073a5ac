#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "nlm.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    NlmStatus s_ = (call);                                                 \
    if (s_ != NLM_STATUS_OK) {                                             \
      fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_,              \
              nlm_last_error_message());                                   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  enum { W = 24, H = 20 };
  double pixels[W * H];
  for (int i = 0; i < W * H; ++i) pixels[i] = (i % W < W / 2) ? 60.0 : 190.0;

  NlmImage *clean = NULL, *noisy = NULL, *noise = NULL, *out = NULL;
  NlmConfig *cfg = NULL;
  CHECK(nlm_image_new(W, H, pixels, &clean));
  CHECK(nlm_add_gaussian_noise(clean, 20.0, 3, &noisy, &noise));
  CHECK(nlm_config_new(20.0, 4, &cfg));
  CHECK(nlm_config_set_selection(cfg, NLM_SELECTION_TOP_K, 20));
  CHECK(nlm_config_set_source(cfg, NLM_SOURCE_ORACLE));
  CHECK(nlm_config_set_center(cfg, NLM_CENTER_EXCLUDE));

  if (nlm_denoise(noisy, cfg, NULL, &out) != NLM_STATUS_MISSING_ORACLE) {
    fprintf(stderr, "expected a missing-oracle error\n");
    return 1;
  }
  CHECK(nlm_denoise(noisy, cfg, clean, &out));

  double before = 0, after = 0;
  CHECK(nlm_psnr(clean, noisy, &before));
  CHECK(nlm_psnr(clean, out, &after));
  NlmDecomposition parts;
  CHECK(nlm_decompose_eqm(clean, noise, cfg, &parts));
  double sum = parts.bias + parts.variance + parts.covariance;
  if (!(after > before) || fabs(parts.eqm - sum) > 1e-9 * parts.eqm) {
    fprintf(stderr, "unexpected result: %f -> %f, eqm %f vs %f\n", before, after, parts.eqm, sum);
    return 1;
  }
  printf("%.6f %.6f\n", before, after);

  nlm_image_free(out);
  nlm_image_free(noise);
  nlm_image_free(noisy);
  nlm_image_free(clean);
  nlm_config_free(cfg);
  return 0;
}
