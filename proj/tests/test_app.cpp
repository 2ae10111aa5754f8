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


#include <gtest/gtest.h>

#include <filesystem>

#include <json.hpp>

#include "fgcil/app.hpp"
#include "fgcil/error.hpp"

namespace fgcil {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fgcil_app_" + name);
  fs::remove_all(p);
  return p;
}

std::string blob_config(const fs::path& out, const std::string& extra = "") {
  return R"({"dataset": "blobs", "backbone": "mlp", "feature_dim": 8, "classes_per_phase": 5,
             "memory": 20, "epochs": 2, "batch_size": 32, "seeds": [0, 1],
             "output_dir": ")" + out.string() + "\"" + extra + "}";
}

std::string validation_message(const std::string& json) {
  try {
    parse_config(json);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    return e.what();
  }
  ADD_FAILURE() << "config was accepted: " << json;
  return "";
}

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c = parse_config("{}");
  EXPECT_EQ(config_to_json(parse_config(config_to_json(c))), config_to_json(c));
}

TEST(Config, RepositoryConfigsValidate) {
  for (const auto& e : fs::directory_iterator(FGCIL_EXPERIMENTS_DIR)) {
    if (e.path().filename() == "ablations.json") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
  }
}

TEST(Config, AblationDeltasValidate) {
  const auto abl = nlohmann::json::parse(read_file(std::string(FGCIL_EXPERIMENTS_DIR) + "/ablations.json"));
  auto base = nlohmann::json::parse(
      read_file(std::string(FGCIL_EXPERIMENTS_DIR) + "/" + abl.at("base").get<std::string>()));
  for (const auto& [name, delta] : abl.at("deltas").items()) {
    nlohmann::json c = base;
    c.update(delta);
    EXPECT_NO_THROW(parse_config(c.dump())) << name;
  }
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(validation_message(R"({"loss": "lwf"})").find("'loss'"), std::string::npos);
  EXPECT_NE(validation_message(R"({"normalization": "l2"})").find("'normalization'"), std::string::npos);
  EXPECT_NE(validation_message(R"({"backbone": "resnet32-class"})").find("'backbone'"), std::string::npos);
  EXPECT_NE(validation_message(R"({"memory": -1})").find("'memory'"), std::string::npos);
  EXPECT_NE(validation_message(R"({"epochs": "ten"})").find("'epochs'"), std::string::npos);
  EXPECT_NE(validation_message(R"({"seeds": []})").find("'seeds'"), std::string::npos);
  EXPECT_NE(validation_message(R"({"learning_rte": 0.1})").find("'learning_rte'"), std::string::npos);
  EXPECT_NE(validation_message(R"({"normalization": "none", "loss": "wE"})").find("'normalization'"),
            std::string::npos);
  EXPECT_NE(validation_message("[1, 2]").find("object"), std::string::npos);
}

TEST(Commands, RunWritesSeedsSummaryAndMatchingMetrics) {
  const fs::path out = scratch("run");
  write_file((out / "config.json").string(), blob_config(out / "result"));
  const auto summary = nlohmann::json::parse(cmd_run((out / "config.json").string()));
  EXPECT_EQ(summary.at("seeds").size(), 2u);
  EXPECT_TRUE(summary.at("final_incremental_accuracy").contains("std"));
  for (const char* seed : {"seed_0", "seed_1"}) {
    const fs::path dir = out / "result" / seed;
    ASSERT_TRUE(fs::exists(dir / "report.json"));
    EXPECT_EQ(cmd_metrics(dir.string()), read_file((dir / "report.json").string()));
    EXPECT_EQ(cmd_metrics(dir.string()), cmd_metrics(dir.string()));
  }
  EXPECT_TRUE(fs::exists(out / "result" / "summary.json"));

  // The resolved config of a seed reproduces that seed's run.
  const ExperimentConfig resolved = load_config((out / "result" / "seed_1" / "config.json").string());
  EXPECT_EQ(resolved.seeds, std::vector<std::uint64_t>{1});
  const std::string first = read_file((out / "result" / "seed_1" / "accuracy_matrix.csv").string());
  ExperimentConfig again = resolved;
  again.output_dir = (out / "again").string();
  run_experiment(again);
  EXPECT_EQ(read_file((out / "again" / "seed_1" / "accuracy_matrix.csv").string()), first);

  const std::string files = cmd_plot({(out / "result").string(), (out / "again" / "seed_1").string()},
                                     (out / "plots").string());
  EXPECT_TRUE(fs::exists(out / "plots" / "incremental_accuracy.svg"));
  EXPECT_TRUE(fs::exists(out / "plots" / "phase_accuracy.svg"));
  const std::string svg = read_file((out / "plots" / "incremental_accuracy.svg").string());
  EXPECT_NE(svg.find("result ("), std::string::npos);
  fs::remove_all(out);
}

TEST(Commands, NaiveBaselineConfigRuns) {
  const fs::path out = scratch("naive");
  write_file((out / "c.json").string(),
             blob_config(out / "r", R"(, "memory": 0, "loss": "none", "seeds": [0])"));
  EXPECT_NO_THROW(cmd_run((out / "c.json").string()));
  fs::remove_all(out);
}

TEST(Commands, MetricsOnHandWrittenMatrices) {
  const fs::path out = scratch("metrics");
  write_file((out / "a" / "accuracy_matrix.csv").string(), "phase,group_0,group_1\n0,0.9,\n1,0.7,0.8\n");
  const auto r = nlohmann::json::parse(cmd_metrics((out / "a").string()));
  EXPECT_NEAR(r.at("forgetting").get<double>(), 0.2, 1e-15);
  write_file((out / "b" / "accuracy_matrix.csv").string(), "phase,group_0\n0,0.6\n");
  const auto single = nlohmann::json::parse(cmd_metrics((out / "b").string()));
  EXPECT_TRUE(single.at("forgetting").is_null());
  EXPECT_EQ(single.at("incremental_accuracy")[0].get<double>(), 0.6);
  write_file((out / "c" / "accuracy_matrix.csv").string(), "phase,group_0\n0,x\n");
  try {
    cmd_metrics((out / "c").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  EXPECT_THROW(cmd_metrics((out / "missing").string()), Error);
  fs::remove_all(out);
}

TEST(Commands, PlotRejectsDifferentPhaseCounts) {
  const fs::path out = scratch("plot");
  write_file((out / "c1.json").string(), blob_config(out / "five", R"(, "seeds": [0])"));
  write_file((out / "c2.json").string(),
             blob_config(out / "two", R"(, "seeds": [0], "classes_per_phase": 2)"));
  cmd_run((out / "c1.json").string());
  cmd_run((out / "c2.json").string());
  try {
    cmd_plot({(out / "five").string(), (out / "two").string()}, (out / "plots").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kComparison);
  }
  fs::remove_all(out);
}

TEST(Commands, ToySim2dWritesPlotsAndReport) {
  const fs::path out = scratch("toy");
  ToyCommandOptions o = parse_toy_options(R"({"k": 8, "seeds": [0], "restarts": 1, "output_dir": ")" +
                                          out.string() + "\"}");
  const auto r = nlohmann::json::parse(cmd_toy("sim2d", o));
  EXPECT_TRUE(r.at("results").contains("cn"));
  EXPECT_TRUE(r.at("results").contains("rectified-cn"));
  EXPECT_TRUE(fs::exists(out / "sim2d_cn_seed0.svg"));
  EXPECT_TRUE(fs::exists(out / "sim2d_rectified-cn_seed0.svg"));
  EXPECT_TRUE(fs::exists(out / "report.json"));
  o.k = 1;
  EXPECT_THROW(cmd_toy("sim2d", o), Error);
  EXPECT_THROW(cmd_toy("cifar", o), Error);
  EXPECT_THROW(parse_toy_options(R"({"norm": "l2"})"), Error);
  fs::remove_all(out);
}

}  // namespace
}  // namespace fgcil
