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

#include "fgcil/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fgcil/error.hpp"
#include "fgcil/rng.hpp"

namespace fgcil {

void OptimizerSchedule::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorCode::kValidation,
          "optimizer.learning_rate must be positive");
  require(epochs >= 0, ErrorCode::kValidation, "optimizer.epochs must be >= 0");
  require(batch_size > 0, ErrorCode::kValidation, "optimizer.batch_size must be positive");
  require(momentum >= 0.0 && momentum < 1.0, ErrorCode::kValidation,
          "optimizer.momentum must lie in [0, 1)");
  require(weight_decay >= 0.0, ErrorCode::kValidation, "optimizer.weight_decay must be >= 0");
  require(decay_factor > 0.0, ErrorCode::kValidation, "optimizer.decay_factor must be positive");
  for (std::size_t i = 0; i < decay_epochs.size(); ++i) {
    require(decay_epochs[i] > 0 && decay_epochs[i] < epochs, ErrorCode::kValidation,
            "optimizer.decay_epochs entries must lie in (0, epochs)");
    require(i == 0 || decay_epochs[i] > decay_epochs[i - 1], ErrorCode::kValidation,
            "optimizer.decay_epochs must be strictly increasing");
  }
}

double OptimizerSchedule::rate_at(int epoch) const {
  double lr = learning_rate;
  for (int e : decay_epochs) {
    if (epoch >= e) lr *= decay_factor;
  }
  return lr;
}

std::optional<DistillationSpec> LossConfig::distillation() const {
  auto spec = distillation_preset(preset);
  if (spec && spec->activation == EdgeActivation::kSoftmax) spec->temperature = temperature;
  return spec;
}

namespace {

std::vector<Index> head_rows(const Model& model, std::span<const LabeledExample> batch) {
  std::map<ClassId, Index> rows;
  for (Index r = 0; r < model.class_count(); ++r) rows[model.classes()[static_cast<std::size_t>(r)]] = r;
  std::vector<Index> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) {
    auto it = rows.find(ex.label);
    require(it != rows.end(), ErrorCode::kLabel,
            "label " + std::to_string(ex.label) + " has no head row");
    out.push_back(it->second);
  }
  return out;
}

struct Forward {
  Matrix inputs;
  Matrix features;
  std::vector<LayerCache> tape;
  EdgeTable table;
  ObjectiveTerms terms;
};

Forward forward_objective(const Model& model, std::span<const LabeledExample> batch,
                          const PhaseState& state, const ModelSnapshot* snapshot,
                          const LossConfig& loss, bool keep_tape) {
  Forward f;
  f.inputs = stack_inputs(batch);
  f.features = model.backbone().forward(f.inputs, keep_tape ? &f.tape : nullptr);
  f.table = model.edges(f.features);
  const auto labels = head_rows(model, batch);

  const auto old_count = static_cast<Index>(state.old_classes.size());
  const auto spec = loss.distillation();
  const DistillationSpec* spec_ptr = nullptr;
  std::optional<EdgeSnapshot> old_edges;
  if (spec && old_count > 0) {
    require(snapshot != nullptr, ErrorCode::kConfiguration,
            "distillation after the first phase needs a model snapshot");
    require(snapshot->old_class_count() == old_count, ErrorCode::kConfiguration,
            "snapshot head does not cover the old classes");
    spec_ptr = &*spec;
    old_edges = snapshot->edges(*spec, f.inputs);
  }
  const double lambda = lambda_value(loss.lambda, state);
  f.terms = combined_objective(f.table, labels, model.eta(), loss.classification, spec_ptr,
                               old_edges ? &*old_edges : nullptr, old_count, lambda);
  return f;
}

void sgd_step(Model& model, const OptimizerSchedule& schedule, double lr) {
  for (Parameter* p : model.parameters()) {
    Matrix g = p->grad;
    if (p->decay && schedule.weight_decay > 0.0) g += schedule.weight_decay * p->value;
    p->velocity = schedule.momentum * p->velocity + g;
    p->value -= lr * p->velocity;
  }
}

}  // namespace

ObjectiveTerms batch_objective(const Model& model, std::span<const LabeledExample> batch,
                               const PhaseState& state, const ModelSnapshot* snapshot,
                               const LossConfig& loss) {
  require(!batch.empty(), ErrorCode::kInput, "empty batch");
  return forward_objective(model, batch, state, snapshot, loss, false).terms;
}

Model& train_phase(Model& model, std::span<const LabeledExample> data, const PhaseState& state,
                   const ModelSnapshot* snapshot, const LossConfig& loss,
                   const OptimizerSchedule& schedule, std::uint64_t seed,
                   std::vector<EpochLoss>* log) {
  require(!data.empty(), ErrorCode::kInput, "phase has no training data");
  schedule.validate();

  std::vector<std::size_t> order(data.size());
  std::vector<LabeledExample> batch;
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    Rng rng(derive_seed({seed, state.phase_index, static_cast<std::uint64_t>(epoch)}));
    shuffle(order, rng);
    const double lr = schedule.rate_at(epoch);

    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(schedule.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(schedule.batch_size));
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);

      Forward f = forward_objective(model, batch, state, snapshot, loss, true);
      require(std::isfinite(f.terms.value), ErrorCode::kInput,
              "non-finite loss in phase " + std::to_string(state.phase_index) + ", epoch " +
                  std::to_string(epoch));
      total += f.terms.value * static_cast<double>(batch.size());

      model.zero_grad();
      const EdgeTable::Gradients g = f.table.backward(f.terms.d_activations);
      model.weights_parameter().grad += g.weights;
      model.biases_parameter().grad.row(0) += g.biases.transpose();
      model.eta_parameter().grad(0, 0) += f.terms.d_eta;
      model.backbone().backward(g.features, f.tape);
      sgd_step(model, schedule, lr);
    }
    if (log != nullptr) {
      log->push_back({state.phase_index, epoch, total / static_cast<double>(data.size())});
    }
  }
  return model;
}

Matrix extract_features(const Model& model, std::span<const LabeledExample> examples) {
  constexpr std::size_t kChunk = 256;
  Matrix out(static_cast<Index>(examples.size()), model.backbone().feature_dim());
  for (std::size_t start = 0; start < examples.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, examples.size() - start);
    out.middleRows(static_cast<Index>(start), static_cast<Index>(n)) =
        model.features(stack_inputs(examples.subspan(start, n)));
  }
  return out;
}

void update_exemplars(ExemplarStore& store, const Model& model, const DatasetSplit& train,
                      std::span<const ClassId> new_classes, std::size_t seen_class_count) {
  if (store.memory_budget() == 0) return;
  ExemplarStore next = rebalance(store, seen_class_count);
  const std::size_t quota = per_class_quota(store.memory_budget(), seen_class_count);
  std::map<ClassId, std::vector<LabeledExample>> by_class;
  for (std::size_t k = 0; k < train.size(); ++k) {
    if (std::find(new_classes.begin(), new_classes.end(), train.labels[k]) != new_classes.end()) {
      by_class[train.labels[k]].push_back(example_at(train, k));
    }
  }
  for (ClassId c : new_classes) {
    auto& candidates = by_class[c];
    if (candidates.empty() || quota == 0) continue;
    const Matrix unit = normalize_rows(extract_features(model, candidates));
    const auto picks = herd_select(unit, std::min(quota, candidates.size()));
    std::vector<LabeledExample> chosen;
    for (std::size_t p : picks) chosen.push_back(candidates[p]);
    next.insert(c, std::move(chosen));
  }
  store = std::move(next);
}

PhaseEvaluation evaluate_phase(const Model& model, const ExemplarStore& store,
                               const PhaseSchedule& schedule, std::size_t phase,
                               const DatasetSplit& test, bool renormalize_means) {
  const auto examples = seen_class_examples(schedule, phase, test);
  require(!examples.empty(), ErrorCode::kMetric, "no test samples for the seen classes");
  const PhaseState state = phase_state(schedule, phase);

  PhaseEvaluation ev;
  ev.nearest_mean = std::all_of(state.all_classes.begin(), state.all_classes.end(),
                                [&](ClassId c) { return store.contains(c) && !store.exemplars(c).empty(); });
  const Matrix features = extract_features(model, examples);
  if (ev.nearest_mean) {
    std::vector<ClassMean> means;
    for (ClassId c : state.all_classes) {
      const auto& ex = store.exemplars(c);
      means.push_back(class_mean(c, normalize_rows(extract_features(model, ex)), renormalize_means));
    }
    ev.predictions = nme_classify(normalize_rows(features), means);
  } else {
    const Matrix& acts = model.edges(features).activations();
    for (Index k = 0; k < acts.rows(); ++k) {
      Index best = 0;
      acts.row(k).maxCoeff(&best);
      ev.predictions.push_back(model.classes()[static_cast<std::size_t>(best)]);
    }
  }

  std::map<ClassId, std::pair<std::size_t, std::size_t>> per_class;  // correct, total
  for (std::size_t k = 0; k < examples.size(); ++k) {
    ev.labels.push_back(examples[k].label);
    auto& cell = per_class[examples[k].label];
    cell.first += ev.predictions[k] == examples[k].label;
    cell.second += 1;
  }
  for (ClassId c : state.all_classes) {
    const auto& cell = per_class[c];
    ev.class_accuracy.push_back(cell.second == 0 ? 0.0
                                                 : static_cast<double>(cell.first) /
                                                       static_cast<double>(cell.second));
  }
  for (std::size_t g = 0; g <= phase; ++g) {
    std::size_t correct = 0;
    std::size_t total = 0;
    for (ClassId c : schedule.phase_groups[g]) {
      correct += per_class[c].first;
      total += per_class[c].second;
    }
    require(total > 0, ErrorCode::kMetric, "phase group " + std::to_string(g) + " has no test samples");
    ev.group_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(total));
    ev.group_sizes.push_back(total);
  }
  return ev;
}

RunResult run_incremental(const RunConfig& config, const Dataset& dataset, std::uint64_t seed) {
  config.optimizer.validate();
  require(!dataset.train.labels.empty(), ErrorCode::kInput, "dataset has no training data");

  RunResult result;
  result.schedule = build_schedule(dataset.num_classes, config.classes_per_phase,
                                   config.pretrain_class_count, seed);
  result.store = ExemplarStore(config.memory);
  Rng init(derive_seed({seed, 0x1217}));
  result.model = Model(make_backbone(config.backbone, dataset.train.shape, config.feature_dim, init),
                       config.normalization);
  const std::uint64_t train_seed = derive_seed({seed, 0x7EA1});

  for (std::size_t j = 0; j < result.schedule.phase_count(); ++j) {
    std::optional<ModelSnapshot> old;
    if (j > 0) old.emplace(result.model);
    const PhaseData data = phase_data(result.schedule, j, dataset.train, result.store);
    extend_head(result.model, data.state.new_classes, init);
    train_phase(result.model, data.examples, data.state, old ? &*old : nullptr, config.loss,
                config.optimizer, train_seed, &result.loss_log);
    update_exemplars(result.store, result.model, dataset.train, data.state.new_classes,
                     data.state.all_classes.size());

    const PhaseEvaluation ev = evaluate_phase(result.model, result.store, result.schedule, j,
                                              dataset.test, config.renormalize_means);
    result.accuracy.rows.push_back(ev.group_accuracy);
    if (j + 1 == result.schedule.phase_count()) result.accuracy.group_sizes = ev.group_sizes;
    result.class_accuracy.push_back(ev.class_accuracy);
    result.nearest_mean.push_back(ev.nearest_mean);
  }
  return result;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace

void write_run_artifacts(const RunResult& result, const Dataset& dataset,
                         const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + directory + ": " + ec.message());

  write_text(dir / "schedule.json", schedule_to_json(result.schedule));
  write_text(dir / "accuracy_matrix.csv", matrix_to_csv(result.accuracy.rows, "group_"));
  std::ostringstream sizes;
  sizes << "group,test_samples\n";
  for (std::size_t g = 0; g < result.accuracy.group_sizes.size(); ++g) {
    sizes << g << ',' << result.accuracy.group_sizes[g] << '\n';
  }
  write_text(dir / "group_sizes.csv", sizes.str());
  write_text(dir / "class_accuracy.csv", matrix_to_csv(result.class_accuracy, "class_"));

  std::ostringstream loss;
  loss << "phase,epoch,loss\n";
  char buf[64];
  for (const auto& e : result.loss_log) {
    std::snprintf(buf, sizeof buf, "%.17g", e.loss);
    loss << e.phase << ',' << e.epoch << ',' << buf << '\n';
  }
  write_text(dir / "loss_log.csv", loss.str());
  write_text(dir / "exemplars.json", store_to_json(result.store, dataset.name));
  save_checkpoint(result.model, (dir / "model.bin").string());
  write_text(dir / "report.json",
             report_to_json(compute_report(result.accuracy, &result.class_accuracy)));
}

}  // namespace fgcil
