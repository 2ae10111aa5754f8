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

#ifndef FGCIL_METRICS_HPP
#define FGCIL_METRICS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgcil/types.hpp"

namespace fgcil {

// rows[j][i]: accuracy on phase-group i after training phase j, i <= j.
struct AccuracyMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> group_sizes;  // test samples per group; empty means equal

  std::size_t phase_count() const { return rows.size(); }
  // Throws kMetric on a non-triangular shape or an entry outside [0, 1].
  void validate() const;
};

double incremental_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels);
// Pooled accuracy after `phase`, i.e. the group-size weighted mean of its row.
double incremental_accuracy(const AccuracyMatrix& matrix, std::size_t phase);
std::vector<double> incremental_accuracies(const AccuracyMatrix& matrix);

double average_incremental_accuracy(std::span<const double> accuracies);

struct PhaseAccuracy {
  std::vector<double> accuracies;
  double mad = 0.0;
};
PhaseAccuracy phase_accuracy_mad(const AccuracyMatrix& matrix);

// Per group: best accuracy over phases i..J (so never negative) minus the
// accuracy after the last phase.
std::vector<double> forgetting_per_group(const AccuracyMatrix& matrix);
double forgetting_measure(const AccuracyMatrix& matrix);

// Same max-drop measure over a ragged matrix whose columns are classes; row
// lengths are nondecreasing and a column exists from the row it first appears.
double class_forgetting_measure(const std::vector<std::vector<double>>& rows);

struct MetricsReport {
  std::vector<double> incremental_accuracy;
  double average_incremental_accuracy = 0.0;
  std::vector<double> phase_accuracy;
  double phase_mad = 0.0;
  std::optional<double> forgetting;            // absent for a single phase
  std::optional<double> class_forgetting;      // needs per-class accuracies
};

MetricsReport compute_report(const AccuracyMatrix& matrix,
                             const std::vector<std::vector<double>>* class_rows = nullptr);
std::string report_to_json(const MetricsReport& report);

// CSV with header "phase,group_0,..."; cells with i > j are left empty.
std::string matrix_to_csv(const std::vector<std::vector<double>>& rows, const char* column_prefix);
std::vector<std::vector<double>> matrix_from_csv(const std::string& text);

}  // namespace fgcil

#endif  // FGCIL_METRICS_HPP
