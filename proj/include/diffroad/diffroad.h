// Copyright 2026 The DiffRoad Authors
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

#ifndef DIFFROAD__DIFFROAD_H_
#define DIFFROAD__DIFFROAD_H_

#include <stddef.h>

#if defined(_WIN32)
#  if defined(DIFFROAD_BUILDING_LIBRARY)
#    define DR_API __declspec(dllexport)
#  else
#    define DR_API __declspec(dllimport)
#  endif
#else
#  define DR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dr_status {
  DR_OK = 0,
  DR_ERR_INVALID_ARGUMENT = 1,
  DR_ERR_CONFIG = 2,
  DR_ERR_STAGE = 3,
  DR_ERR_IO = 4,
  DR_ERR_PARSE = 5,
  DR_ERR_NETWORK = 6,
  DR_ERR_VERSION = 7,
  DR_ERR_TRUNCATED = 8,
  DR_ERR_INTEGRITY = 9,
  DR_ERR_NUMERIC = 10,
  DR_ERR_UNSUPPORTED = 11,
  DR_ERR_INTERNAL = 100
} dr_status;

typedef struct dr_pipeline dr_pipeline;

/* Receives one JSON log record per call; the string is only valid during the call. */
typedef void (*dr_log_fn)(const char * record_json, void * user);

DR_API const char * dr_version(void);

/* Message of the last failure on the calling thread, or "" if none. */
DR_API const char * dr_last_error(void);

DR_API const char * dr_status_name(dr_status status);

/* Parses and validates a JSON config. Missing keys take their defaults, unknown keys are
   rejected with DR_ERR_CONFIG. */
DR_API dr_status dr_pipeline_create(const char * config_json, dr_pipeline ** out);
DR_API void dr_pipeline_destroy(dr_pipeline * pipeline);

DR_API dr_status dr_pipeline_set_jobs(dr_pipeline * pipeline, int jobs);
DR_API dr_status dr_pipeline_set_log_callback(dr_pipeline * pipeline, dr_log_fn fn, void * user);

/* Fully resolved config as JSON. Release with dr_string_free. */
DR_API dr_status dr_pipeline_effective_config(const dr_pipeline * pipeline, char ** out_json);
DR_API dr_status dr_pipeline_config_hash(const dr_pipeline * pipeline, char ** out_hash);

/* Runs the configured stages. A failing stage yields DR_ERR_STAGE. */
DR_API dr_status dr_pipeline_run(dr_pipeline * pipeline);
DR_API dr_status dr_pipeline_run_stage(dr_pipeline * pipeline, const char * stage);

/* Name of the stage that failed most recently, or NULL. */
DR_API const char * dr_pipeline_failed_stage(const dr_pipeline * pipeline);

DR_API void dr_string_free(char * str);

/* Points are interleaved x, y pairs. */
DR_API dr_status dr_hausdorff(const double * a, size_t a_count, const double * b, size_t b_count,
                              double * out);

/* Both inputs are probability vectors of equal length. Result in nats. */
DR_API dr_status dr_jsd(const double * p, const double * q, size_t bins, double * out);

#ifdef __cplusplus
}
#endif

#endif  // DIFFROAD__DIFFROAD_H_
