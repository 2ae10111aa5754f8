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

#ifndef FGCIL_MODEL_HPP
#define FGCIL_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fgcil/geometry.hpp"
#include "fgcil/losses.hpp"
#include "fgcil/nn.hpp"

namespace fgcil {

// Backbone plus a single growing classification head. Head rows are kept in
// the order classes were added, so the first |C_old| rows are the old ones.
class Model {
 public:
  Model() = default;
  Model(Backbone backbone, Normalization normalization);

  const Backbone& backbone() const { return backbone_; }
  Backbone& backbone() { return backbone_; }
  Normalization normalization() const { return normalization_; }

  Index class_count() const { return static_cast<Index>(class_ids_.size()); }
  const std::vector<ClassId>& classes() const { return class_ids_; }
  Index row_of(ClassId c) const;

  const Matrix& head_weights() const { return weights_.value; }
  Vector head_biases() const { return biases_.value.row(0).transpose(); }
  ClassEmbedding embedding(Index row) const;
  CurvatureScale eta() const { return {eta_.value(0, 0)}; }

  Matrix features(const Matrix& inputs) const;
  EdgeTable edges(const Matrix& features) const;

  // Backbone parameters, then head weights, biases and eta.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void zero_grad();

  // Appends one embedding per class: weights U(-1/sqrt(d), 1/sqrt(d)), bias 0.
  void add_classes(std::span<const ClassId> new_classes, Rng& rng);

  Parameter& weights_parameter() { return weights_; }
  Parameter& biases_parameter() { return biases_; }
  Parameter& eta_parameter() { return eta_; }

  // FNV-1a over every parameter value; changes whenever any weight does.
  std::uint64_t parameter_hash() const;

 private:
  Backbone backbone_;
  Normalization normalization_ = Normalization::kRectifiedCosine;
  std::vector<ClassId> class_ids_;
  Parameter weights_;  // C x d
  Parameter biases_;   // 1 x C
  Parameter eta_;      // 1 x 1
};

// Throws kHead on an empty list or a class the head already has.
void extend_head(Model& model, std::span<const ClassId> new_classes, Rng& rng);

// Frozen copy of the model taken at the start of a phase.
class ModelSnapshot {
 public:
  explicit ModelSnapshot(const Model& model) : model_(model) {}

  const Model& model() const { return model_; }
  Index old_class_count() const { return model_.class_count(); }
  Matrix features(const Matrix& inputs) const { return model_.features(inputs); }
  EdgeSnapshot edges(const DistillationSpec& spec, const Matrix& inputs) const;

 private:
  Model model_;
};

ModelSnapshot snapshot(const Model& model);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace fgcil

#endif  // FGCIL_MODEL_HPP
