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

#include "fgcil/data_stream.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "fgcil/error.hpp"
#include "fgcil/exemplars.hpp"
#include "fgcil/rng.hpp"

namespace fgcil {

LabeledExample example_at(const DatasetSplit& split, std::size_t id) {
  require(id < split.size(), ErrorCode::kInput, "example id " + std::to_string(id) +
                                                    " is out of range");
  return {id, split.input(id), split.labels[id]};
}

int PhaseSchedule::group_of(ClassId c) const {
  for (std::size_t g = 0; g < phase_groups.size(); ++g) {
    const auto& group = phase_groups[g];
    if (std::find(group.begin(), group.end(), c) != group.end()) return static_cast<int>(g);
  }
  return -1;
}

namespace {

std::vector<std::vector<ClassId>> split_groups(const std::vector<ClassId>& ordering,
                                               int classes_per_phase, int pretrain) {
  const int n = static_cast<int>(ordering.size());
  if (classes_per_phase <= 0) {
    fail(ErrorCode::kSchedule, "classes_per_phase must be positive");
  }
  if (pretrain < 0 || pretrain > n) {
    fail(ErrorCode::kSchedule, "pretrain_class_count must lie in [0, num_classes]");
  }
  if ((n - pretrain) % classes_per_phase != 0) {
    fail(ErrorCode::kSchedule, "(num_classes - pretrain_class_count) = " +
                                   std::to_string(n - pretrain) +
                                   " is not divisible by classes_per_phase = " +
                                   std::to_string(classes_per_phase));
  }
  std::vector<std::vector<ClassId>> groups;
  int pos = 0;
  if (pretrain > 0) {
    groups.emplace_back(ordering.begin(), ordering.begin() + pretrain);
    pos = pretrain;
  }
  while (pos < n) {
    groups.emplace_back(ordering.begin() + pos, ordering.begin() + pos + classes_per_phase);
    pos += classes_per_phase;
  }
  return groups;
}

}  // namespace

PhaseSchedule build_schedule(int num_classes, int classes_per_phase, int pretrain_class_count,
                             std::uint64_t seed) {
  require(num_classes > 0, ErrorCode::kSchedule, "num_classes must be positive");
  PhaseSchedule s;
  s.ordering.resize(static_cast<std::size_t>(num_classes));
  std::iota(s.ordering.begin(), s.ordering.end(), 0);
  Rng rng(derive_seed({seed, 0x5C4ED01Eull}));
  shuffle(s.ordering, rng);
  s.classes_per_phase = classes_per_phase;
  s.pretrain_class_count = pretrain_class_count;
  s.seed = seed;
  s.phase_groups = split_groups(s.ordering, classes_per_phase, pretrain_class_count);
  return s;
}

std::string schedule_to_json(const PhaseSchedule& schedule) {
  nlohmann::json j;
  j["ordering"] = schedule.ordering;
  j["classes_per_phase"] = schedule.classes_per_phase;
  j["pretrain_class_count"] = schedule.pretrain_class_count;
  j["seed"] = schedule.seed;
  return j.dump(2);
}

PhaseSchedule schedule_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, std::string("schedule json: ") + e.what());
  }
  PhaseSchedule s;
  try {
    s.ordering = j.at("ordering").get<std::vector<ClassId>>();
    s.classes_per_phase = j.at("classes_per_phase").get<int>();
    s.pretrain_class_count = j.at("pretrain_class_count").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchedule, std::string("schedule json: ") + e.what());
  }
  std::vector<ClassId> sorted = s.ordering;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<ClassId>(i)) {
      fail(ErrorCode::kSchedule, "ordering is not a permutation of 0..n-1");
    }
  }
  s.phase_groups = split_groups(s.ordering, s.classes_per_phase, s.pretrain_class_count);
  return s;
}

PhaseState phase_state(const PhaseSchedule& schedule, std::size_t phase_index) {
  require(phase_index < schedule.phase_count(), ErrorCode::kSchedule,
          "phase " + std::to_string(phase_index) + " does not exist");
  PhaseState st;
  st.phase_index = phase_index;
  for (std::size_t g = 0; g < phase_index; ++g) {
    const auto& group = schedule.phase_groups[g];
    st.old_classes.insert(st.old_classes.end(), group.begin(), group.end());
  }
  st.new_classes = schedule.phase_groups[phase_index];
  st.all_classes = st.old_classes;
  st.all_classes.insert(st.all_classes.end(), st.new_classes.begin(), st.new_classes.end());
  return st;
}

PhaseData phase_data(const PhaseSchedule& schedule, std::size_t phase_index,
                     const DatasetSplit& train, const ExemplarStore& store) {
  PhaseData out;
  out.state = phase_state(schedule, phase_index);
  const std::set<ClassId> fresh(out.state.new_classes.begin(), out.state.new_classes.end());
  const std::set<ClassId> old(out.state.old_classes.begin(), out.state.old_classes.end());
  for (const auto& [c, list] : store.classes()) {
    if (fresh.count(c)) {
      fail(ErrorCode::kContamination,
           "exemplar store holds class " + std::to_string(c) + " which is new in phase " +
               std::to_string(phase_index));
    }
    if (!old.count(c) && !list.empty()) {
      fail(ErrorCode::kContamination,
           "exemplar store holds class " + std::to_string(c) + " which has not been seen yet");
    }
  }
  for (std::size_t id = 0; id < train.size(); ++id) {
    if (fresh.count(train.labels[id])) out.examples.push_back(example_at(train, id));
  }
  for (const auto& [c, list] : store.classes()) {
    out.examples.insert(out.examples.end(), list.begin(), list.end());
  }
  return out;
}

std::vector<LabeledExample> seen_class_examples(const PhaseSchedule& schedule,
                                                std::size_t phase_index,
                                                const DatasetSplit& split) {
  const PhaseState st = phase_state(schedule, phase_index);
  const std::set<ClassId> seen(st.all_classes.begin(), st.all_classes.end());
  std::vector<LabeledExample> out;
  for (std::size_t id = 0; id < split.size(); ++id) {
    if (seen.count(split.labels[id])) out.push_back(example_at(split, id));
  }
  return out;
}

}  // namespace fgcil
