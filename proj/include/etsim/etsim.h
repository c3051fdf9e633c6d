// Copyright 2026 The etsim Authors
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


/* C interface to the simulator. All functions are thread-safe; the error
 * message of the last failing call is kept per thread. */

#ifndef ETSIM_ETSIM_H_
#define ETSIM_ETSIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ETSIM_BUILDING_LIBRARY)
#define ETSIM_API __attribute__((visibility("default")))
#else
#define ETSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum etsim_status {
  ETSIM_OK = 0,
  ETSIM_ERROR_CONFIG = 2,
  ETSIM_ERROR_PHYSICS = 3,
  ETSIM_ERROR_CONVERGENCE = 4,
  ETSIM_ERROR_IO = 5,
  ETSIM_ERROR_INVALID_ARGUMENT = 6,
  ETSIM_ERROR_INTERNAL = 7
} etsim_status;

typedef struct etsim_config etsim_config;

typedef struct etsim_run_options {
  const char* out_dir; /* created when missing */
  uint64_t seed;
  int threads; /* >= 1 */
} etsim_run_options;

ETSIM_API const char* etsim_version(void);

/* Message of the last failing call on this thread; "" after a success. */
ETSIM_API const char* etsim_last_error(void);

ETSIM_API etsim_status etsim_config_load(const char* path, etsim_config** out);
ETSIM_API etsim_status etsim_config_parse(const char* json_text, etsim_config** out);
ETSIM_API void etsim_config_free(etsim_config* config);

/* FNV-1a 64 of the normalized config text. */
ETSIM_API etsim_status etsim_config_hash(const etsim_config* config, uint64_t* out);

ETSIM_API size_t etsim_command_count(void);
/* NULL when index is out of range. */
ETSIM_API const char* etsim_command_name(size_t index);

/* Runs one command and writes its tables plus manifest.json. When
 * wall_time_s is not NULL it receives the run time in seconds. */
ETSIM_API etsim_status etsim_run(const etsim_config* config, const char* command,
                                 const etsim_run_options* options, double* wall_time_s);

#ifdef __cplusplus
}
#endif

#endif /* ETSIM_ETSIM_H_ */
