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

#include "fgcil/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fgcil/datasets.hpp"
#include "fgcil/error.hpp"
#include "fgcil/losses.hpp"
#include "fgcil/rng.hpp"

namespace fgcil {

double SimulationResult::max_pair_cosine() const {
  double best = -1.0;
  for (Index i = 0; i < pair_cosines.rows(); ++i) {
    for (Index j = i + 1; j < pair_cosines.cols(); ++j) best = std::max(best, pair_cosines(i, j));
  }
  return best;
}

double SimulationResult::min_alignment() const { return alignment.minCoeff(); }

namespace {

std::vector<Index> identity_labels(Index k) {
  std::vector<Index> out(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

struct SimState {
  Matrix f, w;
  Vector b;
  double eta = 1.0;
};

double step_loss(Normalization n, const SimState& s, SimState* grad) {
  const EdgeTable table = EdgeTable::compute(n, s.f, s.w, s.b);
  const auto labels = identity_labels(s.f.rows());
  const ClassificationResult r = classification_batch(ClassificationLoss::kBinaryCrossEntropy,
                                                      table.activations(), labels, {s.eta});
  const double k = static_cast<double>(s.f.rows());
  if (grad != nullptr) {
    const EdgeTable::Gradients g = table.backward(r.d_activations / k);
    grad->f = g.features;
    grad->w = g.weights;
    grad->b = g.biases;
    grad->eta = r.d_eta / k;
  }
  return r.per_example.sum() / k;
}

}  // namespace

double simulation_loss(Normalization normalization, const Matrix& features,
                       const Matrix& embeddings, const Vector& biases, double eta) {
  return step_loss(normalization, {features, embeddings, biases, eta}, nullptr);
}

SimulationResult run_2d_simulation(const FreeFeatureProblem& p, std::uint64_t seed) {
  require(p.k >= 2, ErrorCode::kInvalidArgument, "the simulation needs K >= 2 classes");
  require(p.dim >= 2, ErrorCode::kInvalidArgument, "the simulation needs dim >= 2");
  require(p.normalization != Normalization::kNone, ErrorCode::kInvalidArgument,
          "the simulation needs cosine or rectified cosine normalization");
  require(p.steps >= 0 && p.learning_rate > 0.0 && p.restarts >= 1, ErrorCode::kInvalidArgument,
          "invalid simulation step settings");

  SimulationResult best;
  bool have = false;
  for (int r = 0; r < p.restarts; ++r) {
    Rng rng(derive_seed({seed, 0x51D2, static_cast<std::uint64_t>(r)}));
    SimState s;
    s.f.resize(p.k, p.dim);
    s.w.resize(p.k, p.dim);
    s.b = Vector::Zero(p.k);
    for (Index i = 0; i < s.f.size(); ++i) s.f.data()[i] = standard_normal(rng);
    for (Index i = 0; i < s.w.size(); ++i) s.w.data()[i] = standard_normal(rng);
    s.eta = p.initial_eta;
    if (p.normalization == Normalization::kRectifiedCosine && p.random_bias) {
      for (Index i = 0; i < p.k; ++i) s.b(i) = standard_normal(rng);
    }

    SimState g;
    const double initial = step_loss(p.normalization, s, nullptr);
    std::vector<double> trace;
    double loss = initial;
    for (int t = 0; t < p.steps; ++t) {
      loss = step_loss(p.normalization, s, &g);
      trace.push_back(loss);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "simulation diverged at step " << t << "; recent losses:";
        for (std::size_t i = trace.size() > 5 ? trace.size() - 5 : 0; i < trace.size(); ++i) {
          msg << ' ' << trace[i];
        }
        fail(ErrorCode::kSimulation, msg.str());
      }
      s.f -= p.learning_rate * g.f;
      s.w -= p.learning_rate * g.w;
      if (p.normalization == Normalization::kRectifiedCosine) s.b -= p.learning_rate * g.b;
      if (p.learn_eta) s.eta -= p.learning_rate * g.eta;
    }
    loss = step_loss(p.normalization, s, nullptr);
    require(std::isfinite(loss), ErrorCode::kSimulation, "simulation diverged at the last step");
    // (eta, w, b) -> (-eta, -w, -b) leaves every scaled activation unchanged.
    if (s.eta < 0.0) {
      s.eta = -s.eta;
      s.w = -s.w;
      s.b = -s.b;
    }
    if (!have || loss < best.final_loss) {
      have = true;
      best.features = s.f;
      best.embeddings = s.w;
      best.biases = s.b;
      best.eta = s.eta;
      best.initial_loss = initial;
      best.final_loss = loss;
      best.restart = r;
    }
  }

  const Matrix uf = normalize_rows(best.features);
  const Matrix uw = normalize_rows(best.embeddings);
  best.pair_cosines = uf * uf.transpose();
  best.alignment = (uf.array() * uw.array()).rowwise().sum();
  return best;
}

double measure_separation(const Matrix& features, std::span<const ClassId> labels,
                          std::span<const ClassId> classes) {
  require(static_cast<std::size_t>(features.rows()) == labels.size(), ErrorCode::kInput,
          "one label per feature row is required");
  std::map<ClassId, std::pair<Vector, std::size_t>> sums;
  for (ClassId c : classes) sums[c] = {Vector::Zero(features.cols()), 0};
  const Matrix unit = normalize_rows(features);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    auto it = sums.find(labels[k]);
    if (it == sums.end()) {
      if (!classes.empty()) continue;
      it = sums.emplace(labels[k], std::make_pair(Vector::Zero(features.cols()), std::size_t{0})).first;
    }
    it->second.first += unit.row(static_cast<Index>(k)).transpose();
    it->second.second += 1;
  }
  require(sums.size() >= 2, ErrorCode::kInput, "separation needs at least two classes");
  std::vector<Vector> centroids;
  for (const auto& [c, acc] : sums) {
    require(acc.second > 0, ErrorCode::kInput, "class " + std::to_string(c) + " has no samples");
    centroids.push_back(normalize(acc.first));
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids.size(); ++j) {
      total += std::acos(std::clamp(centroids[i].dot(centroids[j]), -1.0, 1.0));
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

ToyResult run_mnist_toy(const Dataset& dataset, Normalization normalization, std::uint64_t seed,
                        const ToyOptions& options) {
  require(!dataset.train.labels.empty() && !dataset.test.labels.empty(), ErrorCode::kIo,
          "the toy needs a dataset with train and test splits");
  require(normalization != Normalization::kNone, ErrorCode::kInvalidArgument,
          "the toy compares cosine and rectified cosine normalization");
  const DatasetSplit train = options.train_per_class > 0
                                 ? limit_per_class(dataset.train, options.train_per_class)
                                 : dataset.train;

  PhaseState state;
  for (ClassId c = 0; c < dataset.num_classes; ++c) state.new_classes.push_back(c);
  state.all_classes = state.new_classes;

  Rng init(derive_seed({seed, 0x70F}));
  ToyResult out;
  out.model = Model(make_backbone("mnist-toy", train.shape, 3, init), normalization);
  extend_head(out.model, state.new_classes, init);

  std::vector<LabeledExample> test;
  for (std::size_t k = 0; k < dataset.test.size(); ++k) test.push_back(example_at(dataset.test, k));
  for (const auto& ex : test) out.test_labels.push_back(ex.label);
  const std::span<const ClassId> classes(state.all_classes);
  out.untrained_separation =
      measure_separation(extract_features(out.model, test), out.test_labels, classes);

  std::vector<LabeledExample> data;
  for (std::size_t k = 0; k < train.size(); ++k) data.push_back(example_at(train, k));
  LossConfig loss;
  loss.preset = "none";
  OptimizerSchedule schedule;
  schedule.epochs = options.epochs;
  schedule.batch_size = options.batch_size;
  schedule.learning_rate = options.learning_rate;
  train_phase(out.model, data, state, nullptr, loss, schedule, derive_seed({seed, 0x70E}),
              &out.loss_log);

  out.test_features = extract_features(out.model, test);
  out.separation = measure_separation(out.test_features, out.test_labels, classes);
  return out;
}

Matrix principal_projection(const Matrix& points) {
  require(points.cols() >= 2, ErrorCode::kInput, "projection needs at least two dimensions");
  const RowVector mean = points.colwise().mean();
  const Matrix centred = points.rowwise() - mean;
  const Eigen::MatrixXd cov = (centred.transpose() * centred) / std::max<double>(1.0, static_cast<double>(points.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::MatrixXd basis = solver.eigenvectors().rightCols(2).rowwise().reverse();
  return centred * basis;
}

}  // namespace fgcil
