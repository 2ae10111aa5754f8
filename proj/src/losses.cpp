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

#include "fgcil/losses.hpp"

#include <algorithm>
#include <cmath>

#include "fgcil/data_stream.hpp"
#include "fgcil/error.hpp"

namespace fgcil {

namespace {

double floored_log(double x) { return std::log(std::max(x, kLogFloor)); }

double bce_discrepancy(double old_p, double new_p) {
  return -old_p * floored_log(new_p) - (1.0 - old_p) * floored_log(1.0 - new_p);
}

double edge_weight(EdgeWeight weight, double old_p) {
  return weight == EdgeWeight::kUniform ? 1.0 : old_p;
}

double discrepancy_value(Discrepancy d, double old_p, double new_p) {
  switch (d) {
    case Discrepancy::kBinaryCrossEntropy:
      return bce_discrepancy(old_p, new_p);
    case Discrepancy::kLogRatio:
      return floored_log(old_p) - floored_log(new_p);
    case Discrepancy::kSquaredDistanceChange: {
      const double change = 2.0 * (floored_log(old_p) - floored_log(new_p));
      return change * change;
    }
  }
  return 0.0;
}

// p * dD/dp, the factor shared by every edge-strength parameterisation.
double discrepancy_log_derivative(Discrepancy d, double old_p, double new_p) {
  switch (d) {
    case Discrepancy::kBinaryCrossEntropy:
      return -old_p + (1.0 - old_p) * new_p / std::max(1.0 - new_p, kLogFloor);
    case Discrepancy::kLogRatio:
      return -1.0;
    case Discrepancy::kSquaredDistanceChange:
      return -8.0 * (floored_log(old_p) - floored_log(new_p));
  }
  return 0.0;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kContract,
          std::string(what) + ": shape mismatch");
}

}  // namespace

std::string_view to_string(ClassificationLoss loss) {
  return loss == ClassificationLoss::kBinaryCrossEntropy ? "bce" : "ce";
}

ClassificationLoss parse_classification_loss(std::string_view name) {
  if (name == "bce") return ClassificationLoss::kBinaryCrossEntropy;
  if (name == "ce") return ClassificationLoss::kCrossEntropy;
  fail(ErrorCode::kValidation, "unknown classification loss '" + std::string(name) + "'");
}

double bce_classification_loss(std::span<const double> activations, Index label,
                               CurvatureScale eta) {
  if (label < 0 || label >= static_cast<Index>(activations.size())) {
    fail(ErrorCode::kLabel, "label " + std::to_string(label) + " is outside the head");
  }
  double loss = 0.0;
  for (Index i = 0; i < static_cast<Index>(activations.size()); ++i) {
    const double z = eta.eta * activations[i];
    loss += (i == label) ? softplus(-z) : softplus(z);
  }
  return loss;
}

double ce_classification_loss(std::span<const double> activations, Index label,
                              CurvatureScale eta) {
  if (label < 0 || label >= static_cast<Index>(activations.size())) {
    fail(ErrorCode::kLabel, "label " + std::to_string(label) + " is outside the head");
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double a : activations) top = std::max(top, eta.eta * a);
  double sum = 0.0;
  for (double a : activations) sum += std::exp(eta.eta * a - top);
  return top + std::log(sum) - eta.eta * activations[label];
}

ClassificationResult classification_batch(ClassificationLoss loss, const Matrix& activations,
                                          std::span<const Index> labels, CurvatureScale eta) {
  require(static_cast<Index>(labels.size()) == activations.rows(), ErrorCode::kContract,
          "one label per example is required");
  const Index n = activations.rows();
  const Index c = activations.cols();
  ClassificationResult r;
  r.per_example.resize(n);
  r.d_activations.resize(n, c);
  for (Index k = 0; k < n; ++k) {
    const Index y = labels[k];
    std::span<const double> row(activations.row(k).data(), static_cast<std::size_t>(c));
    if (loss == ClassificationLoss::kBinaryCrossEntropy) {
      r.per_example[k] = bce_classification_loss(row, y, eta);
      for (Index i = 0; i < c; ++i) {
        const double a = activations(k, i);
        const double residual = sigmoid(eta.eta * a) - (i == y ? 1.0 : 0.0);
        r.d_activations(k, i) = eta.eta * residual;
        r.d_eta += a * residual;
      }
    } else {
      r.per_example[k] = ce_classification_loss(row, y, eta);
      RowVector z = eta.eta * activations.row(k);
      z.array() -= z.maxCoeff();
      RowVector p = z.array().exp();
      p /= p.sum();
      for (Index i = 0; i < c; ++i) {
        const double residual = p[i] - (i == y ? 1.0 : 0.0);
        r.d_activations(k, i) = eta.eta * residual;
        r.d_eta += activations(k, i) * residual;
      }
    }
  }
  return r;
}

DistillationSpec DistillationSpec::icarl_bce() {
  return {"icarl_bce", EdgeActivation::kSigmoid, 2.0, EdgeWeight::kUniform,
          Discrepancy::kBinaryCrossEntropy};
}

DistillationSpec DistillationSpec::e2e_kl(double temperature) {
  return {"e2e_kl", EdgeActivation::kSoftmax, temperature, EdgeWeight::kOldStrength,
          Discrepancy::kLogRatio};
}

DistillationSpec DistillationSpec::weighted_euclidean() {
  return {"wE", EdgeActivation::kEuclidean, 2.0, EdgeWeight::kOldStrength,
          Discrepancy::kSquaredDistanceChange};
}

DistillationSpec DistillationSpec::weighted_euclidean_uniform_gamma() {
  return {"wE_uniform_gamma", EdgeActivation::kEuclidean, 2.0, EdgeWeight::kUniform,
          Discrepancy::kSquaredDistanceChange};
}

DistillationSpec DistillationSpec::bce_with_weighted_euclidean_gamma() {
  return {"bce_with_wE_gamma", EdgeActivation::kEuclidean, 2.0, EdgeWeight::kOldStrength,
          Discrepancy::kBinaryCrossEntropy};
}

const std::vector<std::string>& distillation_preset_names() {
  static const std::vector<std::string> names = {
      "none", "wE", "icarl_bce", "e2e_kl", "wE_uniform_gamma", "bce_with_wE_gamma"};
  return names;
}

std::optional<DistillationSpec> distillation_preset(std::string_view name) {
  if (name == "none") return std::nullopt;
  if (name == "wE") return DistillationSpec::weighted_euclidean();
  if (name == "icarl_bce") return DistillationSpec::icarl_bce();
  if (name == "e2e_kl") return DistillationSpec::e2e_kl();
  if (name == "wE_uniform_gamma") return DistillationSpec::weighted_euclidean_uniform_gamma();
  if (name == "bce_with_wE_gamma") return DistillationSpec::bce_with_weighted_euclidean_gamma();
  fail(ErrorCode::kValidation, "unknown distillation preset '" + std::string(name) + "'");
}

Matrix edge_strengths(EdgeActivation activation, double temperature, const Matrix& activations) {
  switch (activation) {
    case EdgeActivation::kSigmoid:
      return activations.unaryExpr([](double a) { return sigmoid(a); });
    case EdgeActivation::kEuclidean:
      return activations.array().exp();
    case EdgeActivation::kSoftmax: {
      require(temperature > 0, ErrorCode::kContract, "softmax temperature must be positive");
      Matrix z = activations / temperature;
      for (Index k = 0; k < z.rows(); ++k) {
        if (z.cols() == 0) break;
        z.row(k).array() -= z.row(k).maxCoeff();
        z.row(k) = z.row(k).array().exp();
        z.row(k) /= z.row(k).sum();
      }
      return z;
    }
  }
  return activations;
}

EdgeSnapshot EdgeSnapshot::capture(const DistillationSpec& spec, Matrix old_activations) {
  EdgeSnapshot s;
  s.activation = spec.activation;
  s.temperature = spec.temperature;
  s.strengths = edge_strengths(spec.activation, spec.temperature, old_activations);
  s.activations = std::move(old_activations);
  return s;
}

Vector dist_bce(const EdgeSnapshot& snapshot, const Matrix& new_strengths) {
  require_same_shape(snapshot.strengths, new_strengths, "dist_bce");
  Vector out = Vector::Zero(new_strengths.rows());
  for (Index k = 0; k < new_strengths.rows(); ++k) {
    for (Index i = 0; i < new_strengths.cols(); ++i) {
      out[k] += 1.0 * bce_discrepancy(snapshot.strengths(k, i), new_strengths(k, i));
    }
  }
  return out;
}

Vector dist_kl(const EdgeSnapshot& snapshot, const Matrix& new_strengths) {
  require_same_shape(snapshot.strengths, new_strengths, "dist_kl");
  Vector out = Vector::Zero(new_strengths.rows());
  if (new_strengths.cols() == 0) return out;
  for (Index k = 0; k < new_strengths.rows(); ++k) {
    if (std::abs(new_strengths.row(k).sum() - 1.0) > 1e-6 ||
        std::abs(snapshot.strengths.row(k).sum() - 1.0) > 1e-6) {
      fail(ErrorCode::kContract, "dist_kl rows must be probability distributions");
    }
    for (Index i = 0; i < new_strengths.cols(); ++i) {
      const double old_p = snapshot.strengths(k, i);
      if (old_p == 0.0) continue;  // 0 log 0 := 0
      out[k] += old_p * (floored_log(old_p) - floored_log(new_strengths(k, i)));
    }
  }
  return out;
}

Vector dist_weighted_euclidean(const Matrix& old_embeddings, const Matrix& old_features,
                               const Matrix& new_embeddings, const Matrix& new_features) {
  require_same_shape(old_embeddings, new_embeddings, "dist_weighted_euclidean embeddings");
  require_same_shape(old_features, new_features, "dist_weighted_euclidean features");
  require(old_embeddings.cols() == old_features.cols(), ErrorCode::kContract,
          "dist_weighted_euclidean: embedding and feature dimensions differ");
  auto check_rows = [](const Matrix& m, const char* what) {
    for (Index r = 0; r < m.rows(); ++r) require_unit(m.row(r).transpose(), what);
  };
  check_rows(old_embeddings, "old embedding");
  check_rows(new_embeddings, "new embedding");
  check_rows(old_features, "old feature");
  check_rows(new_features, "new feature");

  Vector out = Vector::Zero(new_features.rows());
  for (Index k = 0; k < new_features.rows(); ++k) {
    for (Index i = 0; i < new_embeddings.rows(); ++i) {
      const double old_sq = (old_embeddings.row(i) - old_features.row(k)).squaredNorm();
      const double new_sq = (new_embeddings.row(i) - new_features.row(k)).squaredNorm();
      const double change = old_sq - new_sq;
      out[k] += std::exp(-old_sq / 2.0) * change * change;
    }
  }
  return out;
}

DistillationResult general_distillation(const DistillationSpec& spec,
                                        const EdgeSnapshot& snapshot,
                                        const Matrix& new_activations) {
  require(snapshot.activation == spec.activation &&
              (spec.activation != EdgeActivation::kSoftmax ||
               snapshot.temperature == spec.temperature),
          ErrorCode::kContract, "snapshot was captured for a different edge activation");
  require_same_shape(snapshot.activations, new_activations, "general_distillation");

  const Matrix p = edge_strengths(spec.activation, spec.temperature, new_activations);
  const Matrix& old_p = snapshot.strengths;
  const Index n = p.rows();
  const Index c = p.cols();

  DistillationResult r;
  r.per_example = Vector::Zero(n);
  r.d_activations = Matrix::Zero(n, c);
  RowVector h(c);
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < c; ++i) {
      const double gamma = edge_weight(spec.weight, old_p(k, i));
      r.per_example[k] += gamma * discrepancy_value(spec.discrepancy, old_p(k, i), p(k, i));
      h[i] = gamma * discrepancy_log_derivative(spec.discrepancy, old_p(k, i), p(k, i));
    }
    switch (spec.activation) {
      case EdgeActivation::kEuclidean:
        r.d_activations.row(k) = h;
        break;
      case EdgeActivation::kSigmoid:
        for (Index i = 0; i < c; ++i) {
          r.d_activations(k, i) = h[i] * std::max(1.0 - p(k, i), kLogFloor);
        }
        break;
      case EdgeActivation::kSoftmax: {
        const double total = h.sum();
        for (Index i = 0; i < c; ++i) {
          r.d_activations(k, i) = (h[i] - p(k, i) * total) / spec.temperature;
        }
        break;
      }
    }
  }
  return r;
}

Matrix distillation_activations(const DistillationSpec& spec, const EdgeTable& table,
                                Index old_count) {
  require(old_count >= 0 && old_count <= table.activations().cols(), ErrorCode::kContract,
          "old class count exceeds the head");
  if (spec.activation == EdgeActivation::kEuclidean) {
    return table.euclidean_activations().leftCols(old_count);
  }
  return table.activations().leftCols(old_count);
}

double lambda_value(const LambdaSchedule& schedule, std::size_t old_count,
                    std::size_t all_count) {
  require(all_count > 0, ErrorCode::kContract, "lambda needs at least one seen class");
  require(old_count <= all_count, ErrorCode::kContract, "more old classes than seen classes");
  return schedule.lambda_base *
         std::sqrt(static_cast<double>(old_count) / static_cast<double>(all_count));
}

double lambda_value(const LambdaSchedule& schedule, const PhaseState& state) {
  return lambda_value(schedule, state.old_classes.size(), state.all_classes.size());
}

ObjectiveTerms combined_objective(const EdgeTable& table, std::span<const Index> labels,
                                  CurvatureScale eta, ClassificationLoss classification,
                                  const DistillationSpec* spec, const EdgeSnapshot* snapshot,
                                  Index old_count, double lambda) {
  const Matrix& activations = table.activations();
  const Index n = activations.rows();
  require(n > 0, ErrorCode::kInput, "empty batch");
  const bool distill = spec != nullptr && old_count > 0;
  if (distill && snapshot == nullptr) {
    fail(ErrorCode::kConfiguration, "distillation after the first phase needs a snapshot");
  }

  ClassificationResult cls = classification_batch(classification, activations, labels, eta);
  ObjectiveTerms t;
  t.lambda = distill ? lambda : 0.0;
  t.classification = std::move(cls.per_example);
  t.distillation = Vector::Zero(n);
  t.d_activations = std::move(cls.d_activations);
  t.d_eta = cls.d_eta / static_cast<double>(n);

  if (distill) {
    const Matrix fresh = distillation_activations(*spec, table, old_count);
    DistillationResult d = general_distillation(*spec, *snapshot, fresh);
    t.distillation = std::move(d.per_example);
    t.d_activations.leftCols(old_count) += lambda * d.d_activations;
  }
  t.d_activations /= static_cast<double>(n);
  t.value = (t.classification + t.lambda * t.distillation).sum() / static_cast<double>(n);
  return t;
}

}  // namespace fgcil
