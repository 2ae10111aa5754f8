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

#include "fgcil/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fgcil/error.hpp"

namespace fgcil {

void AccuracyMatrix::validate() const {
  require(!rows.empty(), ErrorCode::kMetric, "accuracy matrix has no rows");
  for (std::size_t j = 0; j < rows.size(); ++j) {
    require(rows[j].size() == j + 1, ErrorCode::kMetric,
            "accuracy matrix row " + std::to_string(j) + " must have " + std::to_string(j + 1) +
                " entries");
    for (double a : rows[j]) {
      require(std::isfinite(a) && a >= 0.0 && a <= 1.0, ErrorCode::kMetric,
              "accuracy entries must lie in [0, 1]");
    }
  }
  require(group_sizes.empty() || group_sizes.size() == rows.size(), ErrorCode::kMetric,
          "group size count does not match the phase count");
}

double incremental_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels) {
  require(!labels.empty(), ErrorCode::kMetric, "empty test set");
  require(predictions.size() == labels.size(), ErrorCode::kMetric,
          "prediction and label counts differ");
  std::size_t correct = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) correct += predictions[k] == labels[k];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double incremental_accuracy(const AccuracyMatrix& matrix, std::size_t phase) {
  matrix.validate();
  require(phase < matrix.rows.size(), ErrorCode::kMetric, "phase out of range");
  const auto& row = matrix.rows[phase];
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double w = matrix.group_sizes.empty() ? 1.0 : static_cast<double>(matrix.group_sizes[i]);
    num += w * row[i];
    den += w;
  }
  require(den > 0.0, ErrorCode::kMetric, "empty test set");
  return num / den;
}

std::vector<double> incremental_accuracies(const AccuracyMatrix& matrix) {
  std::vector<double> out;
  for (std::size_t j = 0; j < matrix.phase_count(); ++j) out.push_back(incremental_accuracy(matrix, j));
  return out;
}

double average_incremental_accuracy(std::span<const double> accuracies) {
  require(!accuracies.empty(), ErrorCode::kMetric, "no incremental accuracies to average");
  return std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
         static_cast<double>(accuracies.size());
}

PhaseAccuracy phase_accuracy_mad(const AccuracyMatrix& matrix) {
  matrix.validate();
  PhaseAccuracy out;
  out.accuracies = matrix.rows.back();
  const double n = static_cast<double>(out.accuracies.size());
  const double mean = std::accumulate(out.accuracies.begin(), out.accuracies.end(), 0.0) / n;
  double dev = 0.0;
  for (double a : out.accuracies) dev += std::abs(a - mean);
  out.mad = dev / n;
  return out;
}

namespace {

std::vector<double> ragged_forgetting(const std::vector<std::vector<double>>& rows) {
  require(rows.size() >= 2, ErrorCode::kMetric, "forgetting needs at least two phases");
  for (std::size_t j = 1; j < rows.size(); ++j) {
    require(rows[j].size() >= rows[j - 1].size(), ErrorCode::kMetric,
            "accuracy rows must not shrink");
  }
  const auto& last = rows.back();
  const std::size_t columns = rows[rows.size() - 2].size();
  std::vector<double> out;
  for (std::size_t i = 0; i < columns; ++i) {
    double best = -1.0;
    for (std::size_t l = 0; l < rows.size(); ++l) {
      if (i < rows[l].size()) best = std::max(best, rows[l][i]);
    }
    out.push_back(best - last[i]);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> forgetting_per_group(const AccuracyMatrix& matrix) {
  matrix.validate();
  return ragged_forgetting(matrix.rows);
}

double forgetting_measure(const AccuracyMatrix& matrix) {
  return mean_of(forgetting_per_group(matrix));
}

double class_forgetting_measure(const std::vector<std::vector<double>>& rows) {
  return mean_of(ragged_forgetting(rows));
}

MetricsReport compute_report(const AccuracyMatrix& matrix,
                             const std::vector<std::vector<double>>* class_rows) {
  MetricsReport r;
  r.incremental_accuracy = incremental_accuracies(matrix);
  r.average_incremental_accuracy = average_incremental_accuracy(r.incremental_accuracy);
  const PhaseAccuracy pa = phase_accuracy_mad(matrix);
  r.phase_accuracy = pa.accuracies;
  r.phase_mad = pa.mad;
  if (matrix.phase_count() >= 2) {
    r.forgetting = forgetting_measure(matrix);
    if (class_rows != nullptr && !class_rows->empty()) {
      r.class_forgetting = class_forgetting_measure(*class_rows);
    }
  }
  return r;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["incremental_accuracy"] = report.incremental_accuracy;
  j["average_incremental_accuracy"] = report.average_incremental_accuracy;
  j["phase_accuracy"] = report.phase_accuracy;
  j["phase_mad"] = report.phase_mad;
  j["forgetting"] = report.forgetting ? nlohmann::json(*report.forgetting) : nlohmann::json();
  j["class_forgetting"] =
      report.class_forgetting ? nlohmann::json(*report.class_forgetting) : nlohmann::json();
  return j.dump(2) + "\n";
}

std::string matrix_to_csv(const std::vector<std::vector<double>>& rows, const char* column_prefix) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.size());
  std::ostringstream out;
  out << "phase";
  for (std::size_t i = 0; i < width; ++i) out << ',' << column_prefix << i;
  out << '\n';
  char buf[64];
  for (std::size_t j = 0; j < rows.size(); ++j) {
    out << j;
    for (std::size_t i = 0; i < width; ++i) {
      out << ',';
      if (i < rows[j].size()) {
        std::snprintf(buf, sizeof buf, "%.17g", rows[j][i]);
        out << buf;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::vector<std::vector<double>> matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line.rfind("phase", 0) == 0,
          ErrorCode::kIo, "matrix CSV is missing its header row");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    require(!cells.empty(), ErrorCode::kIo, "garbled matrix row");
    std::vector<double> row;
    bool ended = false;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (cells[i].empty()) {
        ended = true;
        continue;
      }
      require(!ended, ErrorCode::kIo, "garbled matrix row: value after an empty cell");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[i], &used);
      } catch (const std::exception&) {
        fail(ErrorCode::kIo, "garbled matrix cell '" + cells[i] + "'");
      }
      require(used == cells[i].size(), ErrorCode::kIo, "garbled matrix cell '" + cells[i] + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::kIo, "matrix CSV has no data rows");
  return rows;
}

}  // namespace fgcil
