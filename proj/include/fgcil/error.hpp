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

#ifndef FGCIL_ERROR_HPP
#define FGCIL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fgcil {

// Mirrors fgcil_status in the C API; keep the numbering in sync.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kSchedule = 2,
  kContamination = 3,
  kNormalization = 4,
  kContract = 5,
  kLabel = 6,
  kConfiguration = 7,
  kBudget = 8,
  kInput = 9,
  kClassifier = 10,
  kHead = 11,
  kMetric = 12,
  kSimulation = 13,
  kIo = 14,
  kValidation = 15,
  kComparison = 16,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace fgcil

#endif  // FGCIL_ERROR_HPP
