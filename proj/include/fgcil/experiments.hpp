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

#ifndef FGCIL_EXPERIMENTS_HPP
#define FGCIL_EXPERIMENTS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "fgcil/data_stream.hpp"
#include "fgcil/geometry.hpp"
#include "fgcil/model.hpp"
#include "fgcil/trainer.hpp"

namespace fgcil {

inline constexpr double kCollapseCosine = 0.99;

// One free feature and one free embedding per class, trained by full-batch
// gradient descent on the BCE loss.
struct FreeFeatureProblem {
  int k = 3;
  int dim = 2;
  Normalization normalization = Normalization::kCosine;
  int steps = 5000;
  double learning_rate = 0.1;
  int restarts = 16;  // independent inits; the lowest final loss is kept
  double initial_eta = 1.0;
  bool learn_eta = true;
  bool random_bias = false;  // rectified only: draw b from N(0,1) instead of 0
};

struct SimulationResult {
  Matrix features;    // K x dim
  Matrix embeddings;  // K x dim
  Vector biases;      // K (zeros under plain cosine normalization)
  double eta = 1.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int restart = 0;
  Matrix pair_cosines;  // K x K over the un-augmented features
  Vector alignment;     // cos(f_k, w_k), un-augmented

  double max_pair_cosine() const;  // over distinct pairs
  double min_alignment() const;
};

// Mean over classes of the BCE loss of the K x K activation table.
double simulation_loss(Normalization normalization, const Matrix& features,
                       const Matrix& embeddings, const Vector& biases, double eta);

SimulationResult run_2d_simulation(const FreeFeatureProblem& problem, std::uint64_t seed);

// Mean pairwise angle between normalized centroids of the normalized
// features. When `classes` is non-empty every listed class must occur.
double measure_separation(const Matrix& features, std::span<const ClassId> labels,
                          std::span<const ClassId> classes = {});

struct ToyOptions {
  int epochs = 10;
  int batch_size = 128;
  double learning_rate = 0.01;
  std::size_t train_per_class = 0;  // 0 keeps the whole training split
};

struct ToyResult {
  Model model;
  double separation = 0.0;
  double untrained_separation = 0.0;
  Matrix test_features;
  std::vector<ClassId> test_labels;
  std::vector<EpochLoss> loss_log;
};

// Trains the 3-d feature network on all classes of `dataset` with BCE.
ToyResult run_mnist_toy(const Dataset& dataset, Normalization normalization, std::uint64_t seed,
                        const ToyOptions& options = {});

// Projects rows onto their two leading principal directions.
Matrix principal_projection(const Matrix& points);

}  // namespace fgcil

#endif  // FGCIL_EXPERIMENTS_HPP
