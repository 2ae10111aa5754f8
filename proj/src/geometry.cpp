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

#include "fgcil/geometry.hpp"

#include <cmath>

#include "fgcil/error.hpp"

namespace fgcil {

std::string_view to_string(Normalization n) {
  switch (n) {
    case Normalization::kNone: return "none";
    case Normalization::kCosine: return "cn";
    case Normalization::kRectifiedCosine: return "rectified-cn";
  }
  return "none";
}

Normalization parse_normalization(std::string_view name) {
  if (name == "none") return Normalization::kNone;
  if (name == "cn") return Normalization::kCosine;
  if (name == "rectified-cn" || name == "rcn") return Normalization::kRectifiedCosine;
  fail(ErrorCode::kValidation, "unknown normalization '" + std::string(name) + "'");
}

Vector normalize(const Vector& v) {
  const double n = v.norm();
  if (!(n >= kMinNorm)) fail(ErrorCode::kNormalization, "cannot normalize a zero-norm vector");
  return v / n;
}

Vector augment_feature(const Vector& feature) {
  Vector out(feature.size() + 1);
  out << feature, 1.0;
  return out;
}

Vector augment_embedding(const ClassEmbedding& embedding) {
  Vector out(embedding.weights.size() + 1);
  out << embedding.weights, embedding.bias;
  return out;
}

double cosine_activation(const ClassEmbedding& embedding, const Vector& feature) {
  require(embedding.weights.size() == feature.size(), ErrorCode::kContract,
          "embedding and feature dimensions differ");
  return normalize(embedding.weights).dot(normalize(feature));
}

double rectified_cosine_activation(const ClassEmbedding& embedding, const Vector& feature) {
  require(embedding.weights.size() == feature.size(), ErrorCode::kContract,
          "embedding and feature dimensions differ");
  return normalize(augment_embedding(embedding)).dot(normalize(augment_feature(feature)));
}

void require_unit(const Vector& v, const char* what) {
  if (std::abs(v.norm() - 1.0) > kUnitTolerance) {
    fail(ErrorCode::kContract, std::string(what) + " is not unit-norm");
  }
}

double euclidean_activation(const Vector& unit_embedding, const Vector& unit_feature) {
  require(unit_embedding.size() == unit_feature.size(), ErrorCode::kContract,
          "embedding and feature dimensions differ");
  require_unit(unit_embedding, "embedding");
  require_unit(unit_feature, "feature");
  return -0.5 * (unit_embedding - unit_feature).squaredNorm();
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double scaled_sigmoid(double activation, CurvatureScale scale) {
  return sigmoid(scale.eta * activation);
}

Matrix normalize_rows(const Matrix& m, Vector* norms) {
  Vector n = m.rowwise().norm();
  for (Index r = 0; r < n.size(); ++r) {
    if (!(n[r] >= kMinNorm)) {
      fail(ErrorCode::kNormalization,
           "cannot normalize zero-norm row " + std::to_string(r));
    }
  }
  Matrix out = n.cwiseInverse().asDiagonal() * m;
  if (norms) *norms = std::move(n);
  return out;
}

Matrix normalize_rows_backward(const Matrix& unit_rows, const Vector& norms,
                               const Matrix& grad_unit) {
  const Vector along = (grad_unit.cwiseProduct(unit_rows)).rowwise().sum();
  Matrix g = grad_unit - along.asDiagonal() * unit_rows;
  return norms.cwiseInverse().asDiagonal() * g;
}

EdgeTable EdgeTable::compute(Normalization normalization, const Matrix& features,
                             const Matrix& weights, const Vector& biases) {
  require(features.cols() == weights.cols(), ErrorCode::kContract,
          "feature and embedding dimensions differ");
  require(biases.size() == weights.rows(), ErrorCode::kContract,
          "one bias per class embedding is required");
  EdgeTable t;
  t.normalization_ = normalization;
  switch (normalization) {
    case Normalization::kNone:
      t.features_ = features;
      t.weights_ = weights;
      t.activations_ = features * weights.transpose();
      t.activations_.rowwise() += biases.transpose();
      break;
    case Normalization::kCosine:
      t.unit_features_ = normalize_rows(features, &t.feature_norms_);
      t.unit_embeddings_ = normalize_rows(weights, &t.embedding_norms_);
      t.activations_ = t.unit_features_ * t.unit_embeddings_.transpose();
      break;
    case Normalization::kRectifiedCosine: {
      const Index d = features.cols();
      Matrix f(features.rows(), d + 1);
      f.leftCols(d) = features;
      f.col(d).setOnes();
      Matrix w(weights.rows(), d + 1);
      w.leftCols(d) = weights;
      w.col(d) = biases;
      t.unit_features_ = normalize_rows(f, &t.feature_norms_);
      t.unit_embeddings_ = normalize_rows(w, &t.embedding_norms_);
      t.activations_ = t.unit_features_ * t.unit_embeddings_.transpose();
      break;
    }
  }
  return t;
}

Matrix EdgeTable::euclidean_activations() const {
  require(normalization_ != Normalization::kNone, ErrorCode::kConfiguration,
          "euclidean edges need a normalized head (cn or rectified-cn)");
  return activations_.array() - 1.0;
}

EdgeTable::Gradients EdgeTable::backward(const Matrix& d_activations) const {
  require(d_activations.rows() == activations_.rows() &&
              d_activations.cols() == activations_.cols(),
          ErrorCode::kContract, "activation gradient shape mismatch");
  Gradients g;
  if (normalization_ == Normalization::kNone) {
    g.features = d_activations * weights_;
    g.weights = d_activations.transpose() * features_;
    g.biases = d_activations.colwise().sum().transpose();
    return g;
  }
  const Matrix d_unit_f = d_activations * unit_embeddings_;
  const Matrix d_unit_w = d_activations.transpose() * unit_features_;
  const Matrix d_f = normalize_rows_backward(unit_features_, feature_norms_, d_unit_f);
  const Matrix d_w = normalize_rows_backward(unit_embeddings_, embedding_norms_, d_unit_w);
  if (normalization_ == Normalization::kCosine) {
    g.features = d_f;
    g.weights = d_w;
    g.biases = Vector::Zero(unit_embeddings_.rows());
  } else {
    const Index d = unit_features_.cols() - 1;
    g.features = d_f.leftCols(d);
    g.weights = d_w.leftCols(d);
    g.biases = d_w.col(d);
  }
  return g;
}

}  // namespace fgcil
