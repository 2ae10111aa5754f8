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

#include "fgcil/error.hpp"

namespace fgcil {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kSchedule: return "schedule error";
    case ErrorCode::kContamination: return "contamination error";
    case ErrorCode::kNormalization: return "normalization error";
    case ErrorCode::kContract: return "contract error";
    case ErrorCode::kLabel: return "label error";
    case ErrorCode::kConfiguration: return "configuration error";
    case ErrorCode::kBudget: return "budget error";
    case ErrorCode::kInput: return "input error";
    case ErrorCode::kClassifier: return "classifier error";
    case ErrorCode::kHead: return "head error";
    case ErrorCode::kMetric: return "metric error";
    case ErrorCode::kSimulation: return "simulation error";
    case ErrorCode::kIo: return "I/O error";
    case ErrorCode::kValidation: return "validation error";
    case ErrorCode::kComparison: return "comparison error";
  }
  return "unknown error";
}

}  // namespace fgcil
