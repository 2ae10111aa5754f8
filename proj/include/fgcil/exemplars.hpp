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

#ifndef FGCIL_EXEMPLARS_HPP
#define FGCIL_EXEMPLARS_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgcil/data_stream.hpp"
#include "fgcil/types.hpp"

namespace fgcil {

// Per-class exemplar lists under a global budget. Each list is kept in
// herding priority order, so truncating to m keeps the first m picks.
class ExemplarStore {
 public:
  explicit ExemplarStore(std::size_t memory_budget = 0) : memory_budget_(memory_budget) {}

  std::size_t memory_budget() const { return memory_budget_; }
  std::size_t total() const;
  std::size_t class_count() const { return per_class_.size(); }
  bool contains(ClassId c) const { return per_class_.count(c) != 0; }
  const std::vector<LabeledExample>& exemplars(ClassId c) const;
  const std::map<ClassId, std::vector<LabeledExample>>& classes() const { return per_class_; }

  // Adds (or replaces) the list for a class. Throws kBudget when the store
  // would exceed its budget.
  void insert(ClassId c, std::vector<LabeledExample> ordered);
  void truncate_each(std::size_t per_class);

 private:
  std::size_t memory_budget_;
  std::map<ClassId, std::vector<LabeledExample>> per_class_;
};

// floor(M / class_count); leftover slots stay unused.
std::size_t per_class_quota(std::size_t memory_budget, std::size_t class_count);

// Shrinks every stored list to the quota for `new_class_count_total` classes.
ExemplarStore rebalance(const ExemplarStore& store, std::size_t new_class_count_total);

// Greedy herding over the rows of `features`: each step takes the unused
// candidate that brings the running mean of the picks closest to the mean of
// all candidates. Ties, up to a relative kHerdingTie in squared distance, go
// to the lowest index.
inline constexpr double kHerdingTie = 1e-12;
std::vector<std::size_t> herd_select(const Matrix& features, std::size_t m);

struct ClassMean {
  ClassId class_id = 0;
  Vector mean;
};

// Mean of unit-norm exemplar features, optionally renormalized.
ClassMean class_mean(ClassId class_id, const Matrix& unit_features, bool renormalize = true);

// argmin_i |f - mean_i|, ties to the lowest class id.
ClassId nme_classify(const Vector& feature, std::span<const ClassMean> means);
std::vector<ClassId> nme_classify(const Matrix& features, std::span<const ClassMean> means);

// {"dataset": ..., "memory_budget": M, "classes": {"<id>": [example ids...]}}
std::string store_to_json(const ExemplarStore& store, std::string_view dataset_reference);
ExemplarStore store_from_json(std::string_view text, const DatasetSplit& train);

}  // namespace fgcil

#endif  // FGCIL_EXEMPLARS_HPP
