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

#ifndef FGCIL_DATA_STREAM_HPP
#define FGCIL_DATA_STREAM_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgcil/types.hpp"

namespace fgcil {

class ExemplarStore;

struct TensorShape {
  int channels = 1;
  int height = 1;
  int width = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  bool operator==(const TensorShape&) const = default;
};

// One split of a dataset, stored contiguously. Inputs are already scaled to
// the network's input range.
struct DatasetSplit {
  TensorShape shape;
  std::vector<float> pixels;
  std::vector<ClassId> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const float> input(std::size_t index) const {
    return {pixels.data() + index * shape.size(), shape.size()};
  }
};

struct Dataset {
  std::string name;
  std::string root;
  int num_classes = 0;
  DatasetSplit train;
  DatasetSplit test;
};

// A view of one example inside a DatasetSplit; `id` is its index there.
struct LabeledExample {
  std::size_t id = 0;
  std::span<const float> input;
  ClassId label = 0;
};

LabeledExample example_at(const DatasetSplit& split, std::size_t id);

struct PhaseSchedule {
  std::vector<ClassId> ordering;
  int classes_per_phase = 0;
  int pretrain_class_count = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<ClassId>> phase_groups;

  std::size_t phase_count() const { return phase_groups.size(); }
  int num_classes() const { return static_cast<int>(ordering.size()); }
  // Group index of a class, or -1.
  int group_of(ClassId c) const;
};

PhaseSchedule build_schedule(int num_classes, int classes_per_phase, int pretrain_class_count,
                             std::uint64_t seed);

// {ordering, classes_per_phase, pretrain_class_count, seed}
std::string schedule_to_json(const PhaseSchedule& schedule);
PhaseSchedule schedule_from_json(std::string_view text);

struct PhaseState {
  std::size_t phase_index = 0;
  std::vector<ClassId> old_classes;
  std::vector<ClassId> new_classes;
  std::vector<ClassId> all_classes;  // old followed by new, in schedule order
};

PhaseState phase_state(const PhaseSchedule& schedule, std::size_t phase_index);

struct PhaseData {
  std::vector<LabeledExample> examples;  // new-class training data, then exemplars
  PhaseState state;
};

PhaseData phase_data(const PhaseSchedule& schedule, std::size_t phase_index,
                     const DatasetSplit& train, const ExemplarStore& store);

// Test examples of every class seen up to and including `phase_index`.
std::vector<LabeledExample> seen_class_examples(const PhaseSchedule& schedule,
                                                std::size_t phase_index,
                                                const DatasetSplit& split);

}  // namespace fgcil

#endif  // FGCIL_DATA_STREAM_HPP
