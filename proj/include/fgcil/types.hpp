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

#ifndef FGCIL_TYPES_HPP
#define FGCIL_TYPES_HPP

#include <Eigen/Dense>

namespace fgcil {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
// Batches are row-major: one example (or one class embedding) per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

using ClassId = int;

}  // namespace fgcil

#endif  // FGCIL_TYPES_HPP
