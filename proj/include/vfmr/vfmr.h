// Copyright 2026 The vfmr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the vfmr engine. Objects are opaque handles; every call
 * returns a vfmr_status and, on failure, leaves a message retrievable with
 * vfmr_last_error() on the calling thread. Strings returned through char**
 * out-parameters are owned by the caller and released with
 * vfmr_string_free(). Configuration is passed as a JSON document (NULL or ""
 * selects the defaults). */
#ifndef VFMR_VFMR_H_
#define VFMR_VFMR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(VFMR_BUILDING_LIBRARY)
#    define VFMR_API __declspec(dllexport)
#  else
#    define VFMR_API __declspec(dllimport)
#  endif
#else
#  define VFMR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vfmr_status {
  VFMR_OK = 0,
  VFMR_ERR_INVALID_ARGUMENT = 1,
  VFMR_ERR_INVALID_CONFIG = 2,
  VFMR_ERR_DIMENSION_MISMATCH = 3,
  VFMR_ERR_ZERO_VECTOR = 4,
  VFMR_ERR_INSUFFICIENT_DATA = 5,
  VFMR_ERR_UNKNOWN_IDENTITY = 6,
  VFMR_ERR_NO_RELEVANT_ITEMS = 7,
  VFMR_ERR_STREAM_TOO_SHORT = 8,
  VFMR_ERR_IO = 9,
  VFMR_ERR_INTERNAL = 10,
  VFMR_ERR_INVALID_DATA = 11
} vfmr_status;

typedef enum vfmr_modality { VFMR_VOICE = 0, VFMR_FACE = 1 } vfmr_modality;

typedef struct vfmr_dataset vfmr_dataset;
typedef struct vfmr_model vfmr_model;

typedef struct vfmr_train_summary {
  size_t steps;
  size_t identities;        /* identities in the training partition */
  size_t replacement_draws; /* samples drawn with replacement */
  double initial_loss;
  double final_loss;
} vfmr_train_summary;

VFMR_API const char* vfmr_version(void);
VFMR_API const char* vfmr_status_name(vfmr_status status);
VFMR_API const char* vfmr_last_error(void);
VFMR_API void vfmr_string_free(char* s);

/* Parses, validates and re-emits a config with every default filled in. */
VFMR_API vfmr_status vfmr_config_resolve(const char* config_json, char** out_json);

VFMR_API vfmr_status vfmr_dataset_generate(const char* config_json, vfmr_dataset** out);
VFMR_API vfmr_status vfmr_dataset_load(const char* path, vfmr_dataset** out);
VFMR_API vfmr_status vfmr_dataset_save(const vfmr_dataset* dataset, const char* path);
VFMR_API vfmr_status vfmr_dataset_stats(const vfmr_dataset* dataset, size_t* identities,
                                        size_t* voices, size_t* faces);
VFMR_API void vfmr_dataset_free(vfmr_dataset* dataset);

/* Fresh embedders sized to the dataset's feature dims. */
VFMR_API vfmr_status vfmr_model_init(const char* config_json, const vfmr_dataset* dataset,
                                     vfmr_model** out);
VFMR_API vfmr_status vfmr_model_load(const char* path, vfmr_model** out);
VFMR_API vfmr_status vfmr_model_save(const vfmr_model* model, const char* path);
VFMR_API vfmr_status vfmr_model_embedding_dim(const vfmr_model* model, size_t* dim);
VFMR_API vfmr_status vfmr_model_embed(const vfmr_model* model, vfmr_modality modality,
                                      const double* features, size_t feature_len,
                                      double* out, size_t out_len);
VFMR_API void vfmr_model_free(vfmr_model* model);

/* Trains in place on the configured training partition. loss_csv_path may
 * be NULL; summary may be NULL. */
VFMR_API vfmr_status vfmr_train(vfmr_model* model, const vfmr_dataset* dataset,
                                const char* config_json, const char* loss_csv_path,
                                vfmr_train_summary* summary);

/* Runs the configured evaluation task; either output may be NULL. */
VFMR_API vfmr_status vfmr_evaluate(const vfmr_model* model, const vfmr_dataset* dataset,
                                   const char* config_json, char** report_json,
                                   char** report_csv);

VFMR_API vfmr_status vfmr_confidence(uint64_t identities, double tuples, double* k,
                                     double* t);
VFMR_API vfmr_status vfmr_confidence_batches(uint64_t identities, uint64_t b, uint64_t q,
                                             uint64_t r, uint64_t steps, double* tuples,
                                             double* triplets_per_step, double* k, double* t);

/* Reads two frame-stream files, writes the segments CSV to out_csv_path
 * (NULL: no file) and reports the segment count. */
VFMR_API vfmr_status vfmr_segment_files(const char* stream_path, const char* ground_truth_path,
                                        double threshold, size_t s_min, size_t s_max,
                                        size_t s_step, const char* out_csv_path,
                                        size_t* segment_count, char** csv);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* VFMR_VFMR_H_ */
