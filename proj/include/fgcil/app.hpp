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

#ifndef FGCIL_APP_HPP
#define FGCIL_APP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fgcil/trainer.hpp"

namespace fgcil {

struct ExperimentConfig {
  std::string dataset = "mnist";  // mnist | cifar10 | cifar100 | blobs
  std::string data_root = "data";
  std::size_t train_per_class = 0;  // 0 keeps every training example
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs/default";
  RunConfig run;
};

// Parses the flat JSON config. Unknown keys and bad values throw kValidation
// naming the field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

Dataset load_experiment_dataset(const ExperimentConfig& config);

// Runs every seed into <output_dir>/seed_<s> and writes summary.json.
// Returns the summary document.
std::string cmd_run(const std::string& config_path);
std::string run_experiment(const ExperimentConfig& config);

// Recomputes the metric report from a run directory.
std::string cmd_metrics(const std::string& run_dir);

struct ToyCommandOptions {
  int k = 8;
  int dim = 2;
  std::vector<std::string> normalizations{"cn", "rectified-cn"};
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "toy";
  std::string data_root = "data";
  int epochs = 10;
  std::size_t train_per_class = 0;
  int restarts = 16;
};

ToyCommandOptions parse_toy_options(const std::string& json_text);
// kind is "sim2d" or "mnist". Writes SVG plots and report.json.
std::string cmd_toy(const std::string& kind, const ToyCommandOptions& options);

// Writes incremental_accuracy.svg and phase_accuracy.svg; returns the paths
// as a JSON array.
std::string cmd_plot(const std::vector<std::string>& run_dirs, const std::string& output_dir);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace fgcil

#endif  // FGCIL_APP_HPP
