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

#ifndef FGCIL_LOSSES_HPP
#define FGCIL_LOSSES_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgcil/geometry.hpp"
#include "fgcil/types.hpp"

namespace fgcil {

struct PhaseState;

// Floor applied to every log argument (saturated sigmoids would otherwise
// produce -inf).
inline constexpr double kLogFloor = 1e-12;

enum class ClassificationLoss { kBinaryCrossEntropy, kCrossEntropy };

std::string_view to_string(ClassificationLoss loss);
ClassificationLoss parse_classification_loss(std::string_view name);

// -[log s(eta a_y) + sum_{i != y} log(1 - s(eta a_i))] for one example;
// `label` indexes into `activations`.
double bce_classification_loss(std::span<const double> activations, Index label,
                               CurvatureScale eta);

// -log softmax(eta a)_y, the cross-entropy ablation.
double ce_classification_loss(std::span<const double> activations, Index label,
                              CurvatureScale eta);

struct ClassificationResult {
  Vector per_example;    // N
  Matrix d_activations;  // N x C, gradient of sum(per_example)
  double d_eta = 0.0;
};

ClassificationResult classification_batch(ClassificationLoss loss, const Matrix& activations,
                                          std::span<const Index> labels, CurvatureScale eta);

// How a raw activation a_{i|k} becomes an edge strength p_{i|k}.
enum class EdgeActivation {
  kSigmoid,    // p = s(a)
  kSoftmax,    // p = softmax(a / T) over the old classes
  kEuclidean,  // a = -|w_bar - f_bar|^2 / 2, p = exp(a)
};

enum class EdgeWeight {
  kUniform,      // gamma = 1
  kOldStrength,  // gamma = p*
};

enum class Discrepancy {
  kBinaryCrossEntropy,     // -p* log p - (1 - p*) log(1 - p)
  kLogRatio,               // log p* - log p
  kSquaredDistanceChange,  // (2 log p* - 2 log p)^2, i.e. the change in squared
                           // edge length when p = exp(-|w - f|^2 / 2)
};

// One instance of sum_i gamma_{i|k} D(p*_{i|k}, p_{i|k}).
struct DistillationSpec {
  std::string name;
  EdgeActivation activation = EdgeActivation::kEuclidean;
  double temperature = 2.0;
  EdgeWeight weight = EdgeWeight::kOldStrength;
  Discrepancy discrepancy = Discrepancy::kSquaredDistanceChange;

  static DistillationSpec icarl_bce();
  static DistillationSpec e2e_kl(double temperature = 2.0);
  static DistillationSpec weighted_euclidean();
  static DistillationSpec weighted_euclidean_uniform_gamma();
  static DistillationSpec bce_with_weighted_euclidean_gamma();
};

// Names: wE, icarl_bce, e2e_kl, wE_uniform_gamma, bce_with_wE_gamma; "none"
// yields nullopt (no distillation term). Unknown names throw kValidation.
std::optional<DistillationSpec> distillation_preset(std::string_view name);
const std::vector<std::string>& distillation_preset_names();

Matrix edge_strengths(EdgeActivation activation, double temperature, const Matrix& activations);

// Old-model edges on a batch, frozen for the rest of the step.
struct EdgeSnapshot {
  EdgeActivation activation = EdgeActivation::kSigmoid;
  double temperature = 2.0;
  Matrix activations;  // N x |C_old|
  Matrix strengths;    // N x |C_old|

  static EdgeSnapshot capture(const DistillationSpec& spec, Matrix old_activations);
};

// Direct per-example forms. Rows are examples, columns old classes.
Vector dist_bce(const EdgeSnapshot& snapshot, const Matrix& new_strengths);
Vector dist_kl(const EdgeSnapshot& snapshot, const Matrix& new_strengths);

// sum_i exp(-|w*_i - f*_k|^2 / 2) (|w*_i - f*_k|^2 - |w_i - f_k|^2)^2 from
// unit-norm embedding rows (C x D) and feature rows (N x D).
Vector dist_weighted_euclidean(const Matrix& old_embeddings, const Matrix& old_features,
                               const Matrix& new_embeddings, const Matrix& new_features);

struct DistillationResult {
  Vector per_example;    // N
  Matrix d_activations;  // N x |C_old|, gradient of sum(per_example)
};

DistillationResult general_distillation(const DistillationSpec& spec,
                                        const EdgeSnapshot& snapshot,
                                        const Matrix& new_activations);

// The activations a spec consumes, taken from the first `old_count` columns
// of an edge table.
Matrix distillation_activations(const DistillationSpec& spec, const EdgeTable& table,
                                Index old_count);

struct LambdaSchedule {
  double lambda_base = 0.1;
};

double lambda_value(const LambdaSchedule& schedule, std::size_t old_count,
                    std::size_t all_count);
double lambda_value(const LambdaSchedule& schedule, const PhaseState& state);

struct ObjectiveTerms {
  double value = 0.0;           // batch mean of cls + lambda * dist
  double lambda = 0.0;
  Vector classification;        // per example
  Vector distillation;          // per example (zeros when disabled)
  Matrix d_activations;         // gradient of `value` w.r.t. the head activations
  double d_eta = 0.0;
};

// The combined objective on a batch whose head activations are `table`.
// `snapshot` must be present exactly when `spec` is and old_count > 0.
ObjectiveTerms combined_objective(const EdgeTable& table, std::span<const Index> labels,
                                  CurvatureScale eta, ClassificationLoss classification,
                                  const DistillationSpec* spec, const EdgeSnapshot* snapshot,
                                  Index old_count, double lambda);

}  // namespace fgcil

#endif  // FGCIL_LOSSES_HPP
