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

#ifndef FGCIL_TRAINER_HPP
#define FGCIL_TRAINER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgcil/data_stream.hpp"
#include "fgcil/exemplars.hpp"
#include "fgcil/losses.hpp"
#include "fgcil/metrics.hpp"
#include "fgcil/model.hpp"

namespace fgcil {

struct OptimizerSchedule {
  double learning_rate = 0.1;
  std::vector<int> decay_epochs;
  double decay_factor = 0.2;
  int epochs = 10;
  int batch_size = 128;
  double momentum = 0.9;
  double weight_decay = 1e-4;

  // Throws kValidation naming the offending field.
  void validate() const;
  double rate_at(int epoch) const;
};

struct LossConfig {
  std::string preset = "wE";
  ClassificationLoss classification = ClassificationLoss::kBinaryCrossEntropy;
  LambdaSchedule lambda;
  double temperature = 2.0;

  std::optional<DistillationSpec> distillation() const;
};

struct EpochLoss {
  std::size_t phase = 0;
  int epoch = 0;
  double loss = 0.0;
};

// Objective of one batch under the current model, with no gradient side effects.
ObjectiveTerms batch_objective(const Model& model, std::span<const LabeledExample> batch,
                               const PhaseState& state, const ModelSnapshot* snapshot,
                               const LossConfig& loss);

// Runs the optimizer over `data` for schedule.epochs epochs. Appends one
// entry per epoch to `log` when given.
Model& train_phase(Model& model, std::span<const LabeledExample> data, const PhaseState& state,
                   const ModelSnapshot* snapshot, const LossConfig& loss,
                   const OptimizerSchedule& schedule, std::uint64_t seed,
                   std::vector<EpochLoss>* log = nullptr);

// Backbone features for `examples`, computed in chunks.
Matrix extract_features(const Model& model, std::span<const LabeledExample> examples);

// Replaces the store with the rebalanced old exemplars plus herded exemplars
// for `new_classes` (features normalized with the current model).
void update_exemplars(ExemplarStore& store, const Model& model, const DatasetSplit& train,
                      std::span<const ClassId> new_classes, std::size_t seen_class_count);

struct PhaseEvaluation {
  std::vector<double> group_accuracy;  // one entry per group seen so far
  std::vector<std::size_t> group_sizes;
  std::vector<double> class_accuracy;  // seen classes in schedule order
  std::vector<ClassId> predictions;
  std::vector<ClassId> labels;
  bool nearest_mean = true;
};

// Nearest-mean-of-exemplars over the seen classes; falls back to the head
// argmax when some seen class has no exemplars.
PhaseEvaluation evaluate_phase(const Model& model, const ExemplarStore& store,
                               const PhaseSchedule& schedule, std::size_t phase,
                               const DatasetSplit& test, bool renormalize_means = true);

struct RunConfig {
  std::string backbone = "small-cnn";
  Index feature_dim = 64;
  int classes_per_phase = 2;
  int pretrain_class_count = 0;
  std::size_t memory = 100;
  Normalization normalization = Normalization::kRectifiedCosine;
  LossConfig loss;
  OptimizerSchedule optimizer;
  bool renormalize_means = true;
};

struct RunResult {
  PhaseSchedule schedule;
  AccuracyMatrix accuracy;
  std::vector<std::vector<double>> class_accuracy;
  std::vector<EpochLoss> loss_log;
  std::vector<bool> nearest_mean;
  Model model;
  ExemplarStore store;
};

RunResult run_incremental(const RunConfig& config, const Dataset& dataset, std::uint64_t seed);

// Writes schedule.json, accuracy_matrix.csv, group_sizes.csv,
// class_accuracy.csv, loss_log.csv, exemplars.json, model.bin and report.json.
void write_run_artifacts(const RunResult& result, const Dataset& dataset,
                         const std::string& directory);

}  // namespace fgcil

#endif  // FGCIL_TRAINER_HPP
