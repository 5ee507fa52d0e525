/* Copyright 2026 The WNQ Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Plain-C consumer: proves the public header compiles and links as C. */

#include <stdio.h>
#include <string.h>

#include "wnq/wnq.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(void) {
  EXPECT(strlen(wnq_version()) > 0);

  const uint64_t dims[2] = {2, 4};
  const float data[8] = {0.5f, -1.0f, 0.25f, 0.1f, 2.0f, 0.0f, -0.5f, 1.5f};
  wnq_tensor* t = NULL;
  EXPECT(wnq_tensor_create(WNQ_KIND_FC, dims, 2, data, &t) == WNQ_OK);
  EXPECT(wnq_tensor_filter_count(t) == 2);
  EXPECT(wnq_tensor_filter_size(t) == 4);

  wnq_quant_config cfg;
  wnq_quant_config_init(&cfg);
  EXPECT(cfg.bits == 2 && cfg.train_iters == 1);

  wnq_quantized* q = NULL;
  EXPECT(wnq_quantize_tensor(t, WNQ_METHOD_WNQ, &cfg, &q) == WNQ_OK);
  wnq_tensor* deq = NULL;
  EXPECT(wnq_quantized_dequantize(q, &deq) == WNQ_OK);

  double mse = 0.0;
  EXPECT(wnq_relative_mse(t, deq, &mse) == WNQ_OK);
  EXPECT(mse >= 0.0);

  double dev = 0.0;
  EXPECT(wnq_fd_check(8, 7, 1e-5, &dev) == WNQ_OK);
  EXPECT(dev < 1e-4);

  EXPECT(wnq_tensor_read(NULL, NULL) == WNQ_ERROR_INVALID_ARGUMENT);
  EXPECT(strlen(wnq_last_error()) > 0);

  wnq_tensor_free(deq);
  wnq_quantized_free(q);
  wnq_tensor_free(t);

  if (failures == 0) printf("c api smoke test passed\n");
  return failures == 0 ? 0 : 1;
}
