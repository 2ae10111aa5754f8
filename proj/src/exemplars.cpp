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

#include "fgcil/exemplars.hpp"

#include <limits>

#include <json.hpp>

#include "fgcil/error.hpp"
#include "fgcil/geometry.hpp"

namespace fgcil {

std::size_t ExemplarStore::total() const {
  std::size_t n = 0;
  for (const auto& [c, list] : per_class_) n += list.size();
  return n;
}

const std::vector<LabeledExample>& ExemplarStore::exemplars(ClassId c) const {
  auto it = per_class_.find(c);
  require(it != per_class_.end(), ErrorCode::kInput,
          "no exemplars stored for class " + std::to_string(c));
  return it->second;
}

void ExemplarStore::insert(ClassId c, std::vector<LabeledExample> ordered) {
  std::size_t others = total();
  if (auto it = per_class_.find(c); it != per_class_.end()) others -= it->second.size();
  if (others + ordered.size() > memory_budget_) {
    fail(ErrorCode::kBudget, "storing " + std::to_string(ordered.size()) +
                                 " exemplars for class " + std::to_string(c) +
                                 " exceeds the memory budget of " +
                                 std::to_string(memory_budget_));
  }
  for (const auto& e : ordered) {
    require(e.label == c, ErrorCode::kInput, "exemplar label does not match its class");
  }
  per_class_[c] = std::move(ordered);
}

void ExemplarStore::truncate_each(std::size_t per_class) {
  for (auto& [c, list] : per_class_) {
    if (list.size() > per_class) list.resize(per_class);
  }
}

std::size_t per_class_quota(std::size_t memory_budget, std::size_t class_count) {
  if (class_count == 0) return memory_budget;
  return memory_budget / class_count;
}

ExemplarStore rebalance(const ExemplarStore& store, std::size_t new_class_count_total) {
  require(new_class_count_total >= store.class_count(), ErrorCode::kInput,
          "rebalance cannot shrink the number of classes");
  ExemplarStore out = store;
  out.truncate_each(per_class_quota(store.memory_budget(), new_class_count_total));
  return out;
}

std::vector<std::size_t> herd_select(const Matrix& features, std::size_t m) {
  const auto n = static_cast<std::size_t>(features.rows());
  require(n > 0, ErrorCode::kInput, "herding needs at least one candidate");
  require(m <= n, ErrorCode::kBudget, "cannot herd " + std::to_string(m) + " exemplars from " +
                                          std::to_string(n) + " candidates");
  require(features.allFinite(), ErrorCode::kInput, "herding features must be finite");

  const RowVector target = features.colwise().mean();
  RowVector running_sum = RowVector::Zero(features.cols());
  std::vector<bool> used(n, false);
  std::vector<std::size_t> picks;
  picks.reserve(m);
  for (std::size_t t = 1; t <= m; ++t) {
    std::size_t best = n;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double dist =
          (target - (running_sum + features.row(static_cast<Index>(i))) / static_cast<double>(t))
              .squaredNorm();
      if (best == n || dist < best_dist - kHerdingTie * std::max(1.0, best_dist)) {
        best_dist = dist;
        best = i;
      }
    }
    used[best] = true;
    running_sum += features.row(static_cast<Index>(best));
    picks.push_back(best);
  }
  return picks;
}

ClassMean class_mean(ClassId class_id, const Matrix& unit_features, bool renormalize) {
  require(unit_features.rows() > 0, ErrorCode::kClassifier,
          "class " + std::to_string(class_id) + " has no exemplars");
  ClassMean cm{class_id, unit_features.colwise().mean().transpose()};
  if (renormalize) cm.mean = normalize(cm.mean);
  return cm;
}

ClassId nme_classify(const Vector& feature, std::span<const ClassMean> means) {
  require(!means.empty(), ErrorCode::kClassifier, "no class means to classify against");
  ClassId best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& cm : means) {
    require(cm.mean.size() == feature.size(), ErrorCode::kContract,
            "class mean and feature dimensions differ");
    const double dist = (feature - cm.mean).squaredNorm();
    if (dist < best_dist || (dist == best_dist && cm.class_id < best)) {
      best_dist = dist;
      best = cm.class_id;
    }
  }
  return best;
}

std::vector<ClassId> nme_classify(const Matrix& features, std::span<const ClassMean> means) {
  std::vector<ClassId> out(static_cast<std::size_t>(features.rows()));
  for (Index k = 0; k < features.rows(); ++k) {
    out[static_cast<std::size_t>(k)] = nme_classify(Vector(features.row(k).transpose()), means);
  }
  return out;
}

std::string store_to_json(const ExemplarStore& store, std::string_view dataset_reference) {
  nlohmann::json j;
  j["dataset"] = std::string(dataset_reference);
  j["memory_budget"] = store.memory_budget();
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [c, list] : store.classes()) {
    std::vector<std::size_t> ids;
    for (const auto& e : list) ids.push_back(e.id);
    classes[std::to_string(c)] = ids;
  }
  j["classes"] = classes;
  return j.dump(2);
}

ExemplarStore store_from_json(std::string_view text, const DatasetSplit& train) {
  try {
    const auto j = nlohmann::json::parse(text);
    ExemplarStore store(j.at("memory_budget").get<std::size_t>());
    for (const auto& [key, ids] : j.at("classes").items()) {
      const ClassId c = std::stoi(key);
      std::vector<LabeledExample> list;
      for (std::size_t id : ids.get<std::vector<std::size_t>>()) {
        list.push_back(example_at(train, id));
      }
      store.insert(c, std::move(list));
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, std::string("exemplar store json: ") + e.what());
  }
}

}  // namespace fgcil
