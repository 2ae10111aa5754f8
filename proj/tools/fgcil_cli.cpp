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

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fgcil/fgcil.h"

namespace {

int report(fgcil_status status, char* text) {
  if (status != FGCIL_OK) {
    std::fprintf(stderr, "fgcil: %s: %s\n", fgcil_status_name(status), fgcil_last_error());
    return static_cast<int>(status);
  }
  if (text != nullptr) {
    std::fputs(text, stdout);
    fgcil_string_free(text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Class-incremental learning experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fgcil_version()));

  std::string config_path;
  auto* run = app.add_subcommand("run", "train every seed of a config and write its artifacts");
  run->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);

  std::string run_dir;
  auto* metrics = app.add_subcommand("metrics", "recompute the metric report of a run directory");
  metrics->add_option("run_dir", run_dir)->required();

  std::string kind;
  int k = 8;
  int dim = 2;
  std::string norm = "both";
  std::vector<std::uint64_t> seeds{0};
  std::string toy_out = "toy";
  std::string data_root = "data";
  int epochs = 10;
  auto* toy = app.add_subcommand("toy", "run the MNIST 3-d feature toy or the 2-d simulation");
  toy->add_option("kind", kind)->required()->check(CLI::IsMember({"mnist", "sim2d"}));
  toy->add_option("--k", k, "classes in the 2-d simulation");
  toy->add_option("--dim", dim, "feature dimension of the simulation");
  toy->add_option("--norm", norm, "cn, rectified-cn or both");
  toy->add_option("--seeds", seeds, "seeds to run (space or comma separated)")->delimiter(',');
  toy->add_option("--out", toy_out, "output directory");
  toy->add_option("--data-root", data_root, "dataset root for mnist");
  toy->add_option("--epochs", epochs, "training epochs for mnist");

  std::vector<std::string> plot_dirs;
  std::string plot_out = ".";
  auto* plot = app.add_subcommand("plot", "plot incremental and phase accuracy of runs");
  plot->add_option("run_dirs", plot_dirs)->required();
  plot->add_option("--out", plot_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  char* text = nullptr;
  if (*run) return report(fgcil_cmd_run(config_path.c_str(), &text), text);
  if (*metrics) return report(fgcil_cmd_metrics(run_dir.c_str(), &text), text);
  if (*toy) {
    nlohmann::json options = {{"k", k},         {"dim", dim},           {"norm", norm},
                              {"seeds", seeds}, {"output_dir", toy_out}, {"data_root", data_root},
                              {"epochs", epochs}};
    return report(fgcil_cmd_toy(kind.c_str(), options.dump().c_str(), &text), text);
  }
  std::vector<const char*> dirs;
  for (const auto& d : plot_dirs) dirs.push_back(d.c_str());
  return report(fgcil_cmd_plot(dirs.data(), dirs.size(), plot_out.c_str(), &text), text);
}
