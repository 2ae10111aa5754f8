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

#include "fgcil/fgcil.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "fgcil/app.hpp"
#include "fgcil/data_stream.hpp"
#include "fgcil/error.hpp"
#include "fgcil/losses.hpp"
#include "fgcil/metrics.hpp"

struct fgcil_schedule {
  fgcil::PhaseSchedule value;
};

namespace {

thread_local std::string g_last_error;

fgcil_status set_error(fgcil_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
fgcil_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return FGCIL_OK;
  } catch (const fgcil::Error& e) {
    return set_error(static_cast<fgcil_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(FGCIL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(FGCIL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(FGCIL_ERR_INTERNAL, "unknown failure");
  }
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  fgcil::require(p != nullptr, fgcil::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* fgcil_version(void) { return "0.1.0"; }

const char* fgcil_status_name(fgcil_status status) {
  if (status == FGCIL_OK) return "ok";
  if (status == FGCIL_ERR_INTERNAL) return "internal error";
  if (status >= FGCIL_ERR_INVALID_ARGUMENT && status <= FGCIL_ERR_COMPARISON) {
    return fgcil::error_code_name(static_cast<fgcil::ErrorCode>(static_cast<int>(status)));
  }
  return "unknown status";
}

const char* fgcil_last_error(void) { return g_last_error.c_str(); }

void fgcil_string_free(char* s) { std::free(s); }

fgcil_status fgcil_validate_config(const char* config_json, char** resolved_json) {
  return guarded([&] {
    need(config_json, "config_json");
    need(resolved_json, "resolved_json");
    *resolved_json = copy_out(fgcil::config_to_json(fgcil::parse_config(config_json)));
  });
}

fgcil_status fgcil_cmd_run(const char* config_path, char** summary_json) {
  return guarded([&] {
    need(config_path, "config_path");
    const std::string summary = fgcil::cmd_run(config_path);
    if (summary_json != nullptr) *summary_json = copy_out(summary);
  });
}

fgcil_status fgcil_cmd_metrics(const char* run_dir, char** report_json) {
  return guarded([&] {
    need(run_dir, "run_dir");
    need(report_json, "report_json");
    *report_json = copy_out(fgcil::cmd_metrics(run_dir));
  });
}

fgcil_status fgcil_cmd_toy(const char* kind, const char* options_json, char** report_json) {
  return guarded([&] {
    need(kind, "kind");
    const auto options = fgcil::parse_toy_options(options_json == nullptr ? "" : options_json);
    const std::string report = fgcil::cmd_toy(kind, options);
    if (report_json != nullptr) *report_json = copy_out(report);
  });
}

fgcil_status fgcil_cmd_plot(const char* const* run_dirs, size_t count, const char* output_dir,
                            char** files_json) {
  return guarded([&] {
    fgcil::require(count == 0 || run_dirs != nullptr, fgcil::ErrorCode::kInvalidArgument,
                   "run_dirs is null");
    std::vector<std::string> dirs;
    for (size_t i = 0; i < count; ++i) {
      need(run_dirs[i], "run directory");
      dirs.emplace_back(run_dirs[i]);
    }
    const std::string files = fgcil::cmd_plot(dirs, output_dir == nullptr ? "." : output_dir);
    if (files_json != nullptr) *files_json = copy_out(files);
  });
}

fgcil_status fgcil_schedule_create(int num_classes, int classes_per_phase, int pretrain_class_count,
                                   uint64_t seed, fgcil_schedule** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto* s = new fgcil_schedule{
        fgcil::build_schedule(num_classes, classes_per_phase, pretrain_class_count, seed)};
    *out = s;
  });
}

void fgcil_schedule_destroy(fgcil_schedule* schedule) { delete schedule; }

fgcil_status fgcil_schedule_phase_count(const fgcil_schedule* schedule, size_t* out) {
  return guarded([&] {
    need(schedule, "schedule");
    need(out, "out");
    *out = schedule->value.phase_count();
  });
}

fgcil_status fgcil_schedule_group(const fgcil_schedule* schedule, size_t phase, int* classes,
                                  size_t capacity, size_t* count) {
  return guarded([&] {
    need(schedule, "schedule");
    need(count, "count");
    fgcil::require(phase < schedule->value.phase_count(), fgcil::ErrorCode::kInvalidArgument,
                   "phase index out of range");
    const auto& group = schedule->value.phase_groups[phase];
    *count = group.size();
    fgcil::require(capacity == 0 || classes != nullptr, fgcil::ErrorCode::kInvalidArgument,
                   "classes is null");
    for (size_t i = 0; i < group.size() && i < capacity; ++i) classes[i] = group[i];
  });
}

fgcil_status fgcil_schedule_to_json(const fgcil_schedule* schedule, char** json) {
  return guarded([&] {
    need(schedule, "schedule");
    need(json, "json");
    *json = copy_out(fgcil::schedule_to_json(schedule->value));
  });
}

fgcil_status fgcil_metrics_compute(const double* rows, size_t phases, const size_t* group_sizes,
                                   char** report_json) {
  return guarded([&] {
    need(report_json, "report_json");
    fgcil::require(phases > 0, fgcil::ErrorCode::kMetric, "accuracy matrix has no rows");
    need(rows, "rows");
    fgcil::AccuracyMatrix m;
    size_t k = 0;
    for (size_t j = 0; j < phases; ++j) {
      m.rows.emplace_back(rows + k, rows + k + j + 1);
      k += j + 1;
    }
    if (group_sizes != nullptr) m.group_sizes.assign(group_sizes, group_sizes + phases);
    *report_json = copy_out(fgcil::report_to_json(fgcil::compute_report(m)));
  });
}

fgcil_status fgcil_lambda(double lambda_base, size_t old_classes, size_t all_classes, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fgcil::lambda_value(fgcil::LambdaSchedule{lambda_base}, old_classes, all_classes);
  });
}

}  // extern "C"
