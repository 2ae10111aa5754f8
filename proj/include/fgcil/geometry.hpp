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

#ifndef FGCIL_GEOMETRY_HPP
#define FGCIL_GEOMETRY_HPP

#include <string>
#include <string_view>

#include "fgcil/types.hpp"

namespace fgcil {

// Norms below this are rejected instead of clamped so that a collapsed
// feature extractor surfaces as an error.
inline constexpr double kMinNorm = 1e-12;

// Tolerance on ||v|| - 1 for inputs that must already be unit vectors.
inline constexpr double kUnitTolerance = 1e-3;

struct ClassEmbedding {
  Vector weights;
  double bias = 0.0;
};

// Learnable slope of the classification sigmoid, shared by all classes.
struct CurvatureScale {
  double eta = 1.0;
};

enum class Normalization {
  kNone,             // a = w.f + b
  kCosine,           // a = cos(w, f)
  kRectifiedCosine,  // a = cos((w, b), (f, 1))
};

std::string_view to_string(Normalization n);
// Accepts "none", "cn", "rectified-cn" (and "rcn").
Normalization parse_normalization(std::string_view name);

Vector normalize(const Vector& v);

// (f, 1) and (w, b).
Vector augment_feature(const Vector& feature);
Vector augment_embedding(const ClassEmbedding& embedding);

double cosine_activation(const ClassEmbedding& embedding, const Vector& feature);
double rectified_cosine_activation(const ClassEmbedding& embedding, const Vector& feature);

// -||w - f||^2 / 2 for unit-norm inputs.
double euclidean_activation(const Vector& unit_embedding, const Vector& unit_feature);

double scaled_sigmoid(double activation, CurvatureScale scale);

// Numerically stable log(1 + exp(x)).
double softplus(double x);
double sigmoid(double x);

void require_unit(const Vector& v, const char* what);

// Rows scaled to unit norm; throws on any row with norm < kMinNorm.
Matrix normalize_rows(const Matrix& m, Vector* norms = nullptr);
// Gradient of row normalization: given unit rows u = v / |v| and dL/du,
// returns dL/dv = (g - u (u.g)) / |v|.
Matrix normalize_rows_backward(const Matrix& unit_rows, const Vector& norms,
                               const Matrix& grad_unit);

// Activation table between a batch of features (N x d) and class embeddings
// (C x d, biases C). Keeps the intermediates needed for the backward pass.
class EdgeTable {
 public:
  struct Gradients {
    Matrix features;  // N x d
    Matrix weights;   // C x d
    Vector biases;    // C
  };

  static EdgeTable compute(Normalization normalization, const Matrix& features,
                           const Matrix& weights, const Vector& biases);

  Normalization normalization() const { return normalization_; }
  const Matrix& activations() const { return activations_; }

  // Euclidean edge activations -||w_bar - f_bar||^2 / 2 = cos - 1; only
  // defined for the normalized variants.
  Matrix euclidean_activations() const;

  Gradients backward(const Matrix& d_activations) const;

 private:
  Normalization normalization_ = Normalization::kNone;
  Matrix features_;
  Matrix weights_;
  Matrix unit_features_;
  Matrix unit_embeddings_;
  Vector feature_norms_;
  Vector embedding_norms_;
  Matrix activations_;
};

}  // namespace fgcil

#endif  // FGCIL_GEOMETRY_HPP
