// Copyright 2026 The fgcil Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the fgcil library. Every function returns a status code;
 * on failure fgcil_last_error() describes the problem for the calling
 * thread. Strings returned through char** are owned by the caller and must
 * be released with fgcil_string_free. */
#ifndef FGCIL_FGCIL_H
#define FGCIL_FGCIL_H

#include <stddef.h>
#include <stdint.h>

#if defined(FGCIL_BUILDING_LIBRARY)
#define FGCIL_API __attribute__((visibility("default")))
#else
#define FGCIL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fgcil_status {
  FGCIL_OK = 0,
  FGCIL_ERR_INVALID_ARGUMENT = 1,
  FGCIL_ERR_SCHEDULE = 2,
  FGCIL_ERR_CONTAMINATION = 3,
  FGCIL_ERR_NORMALIZATION = 4,
  FGCIL_ERR_CONTRACT = 5,
  FGCIL_ERR_LABEL = 6,
  FGCIL_ERR_CONFIGURATION = 7,
  FGCIL_ERR_BUDGET = 8,
  FGCIL_ERR_INPUT = 9,
  FGCIL_ERR_CLASSIFIER = 10,
  FGCIL_ERR_HEAD = 11,
  FGCIL_ERR_METRIC = 12,
  FGCIL_ERR_SIMULATION = 13,
  FGCIL_ERR_IO = 14,
  FGCIL_ERR_VALIDATION = 15,
  FGCIL_ERR_COMPARISON = 16,
  FGCIL_ERR_INTERNAL = 99
} fgcil_status;

FGCIL_API const char* fgcil_version(void);
FGCIL_API const char* fgcil_status_name(fgcil_status status);
/* Message of the last failure on this thread; empty after a success. */
FGCIL_API const char* fgcil_last_error(void);
FGCIL_API void fgcil_string_free(char* s);

/* Configuration */
FGCIL_API fgcil_status fgcil_validate_config(const char* config_json, char** resolved_json);

/* Commands */
FGCIL_API fgcil_status fgcil_cmd_run(const char* config_path, char** summary_json);
FGCIL_API fgcil_status fgcil_cmd_metrics(const char* run_dir, char** report_json);
/* kind: "mnist" or "sim2d"; options_json may be NULL. */
FGCIL_API fgcil_status fgcil_cmd_toy(const char* kind, const char* options_json,
                                     char** report_json);
FGCIL_API fgcil_status fgcil_cmd_plot(const char* const* run_dirs, size_t count,
                                      const char* output_dir, char** files_json);

/* Class schedules */
typedef struct fgcil_schedule fgcil_schedule;

FGCIL_API fgcil_status fgcil_schedule_create(int num_classes, int classes_per_phase,
                                             int pretrain_class_count, uint64_t seed,
                                             fgcil_schedule** out);
FGCIL_API void fgcil_schedule_destroy(fgcil_schedule* schedule);
FGCIL_API fgcil_status fgcil_schedule_phase_count(const fgcil_schedule* schedule, size_t* out);
/* Copies up to `capacity` class ids of group `phase`; *count gets the group size. */
FGCIL_API fgcil_status fgcil_schedule_group(const fgcil_schedule* schedule, size_t phase,
                                            int* classes, size_t capacity, size_t* count);
FGCIL_API fgcil_status fgcil_schedule_to_json(const fgcil_schedule* schedule, char** json);

/* Metrics. `rows` packs the lower triangle row by row (1 + 2 + ... + phases
 * values); group_sizes may be NULL for equal weights. */
FGCIL_API fgcil_status fgcil_metrics_compute(const double* rows, size_t phases,
                                             const size_t* group_sizes, char** report_json);
FGCIL_API fgcil_status fgcil_lambda(double lambda_base, size_t old_classes, size_t all_classes,
                                    double* out);

#ifdef __cplusplus
}
#endif

#endif /* FGCIL_FGCIL_H */
