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

#include "fgcil/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fgcil/datasets.hpp"
#include "fgcil/error.hpp"
#include "fgcil/experiments.hpp"
#include "fgcil/svg.hpp"

namespace fgcil {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) fail(ErrorCode::kIo, "cannot create " + p.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

namespace {

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {
      "dataset",       "data_root",      "train_per_class", "backbone",
      "feature_dim",   "classes_per_phase", "pretrain_class_count", "seeds",
      "memory",        "loss",           "classification_loss", "normalization",
      "lambda_base",   "temperature",    "learning_rate",   "decay_epochs",
      "decay_factor",  "epochs",         "batch_size",      "momentum",
      "weight_decay",  "renormalize_means", "output_dir"};
  return keys;
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kValidation, std::string("config field '") + key + "' has the wrong type");
  }
}

// Accepts only non-negative integers.
std::size_t count_field(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  require(v.is_number_integer() && v.get<long long>() >= 0, ErrorCode::kValidation,
          std::string("config field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

void check(bool ok, const char* key, const std::string& why) {
  require(ok, ErrorCode::kValidation, std::string("config field '") + key + "' " + why);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kValidation, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    require(config_keys().count(key) != 0, ErrorCode::kValidation,
            "config field '" + key + "' is not recognised");
  }

  ExperimentConfig c;
  c.dataset = field<std::string>(j, "dataset", c.dataset);
  check(c.dataset == "mnist" || c.dataset == "cifar10" || c.dataset == "cifar100" ||
            c.dataset == "blobs",
        "dataset", "must be one of mnist, cifar10, cifar100, blobs");
  c.data_root = field<std::string>(j, "data_root", c.data_root);
  c.train_per_class = count_field(j, "train_per_class", c.train_per_class);
  c.output_dir = field<std::string>(j, "output_dir", c.output_dir);
  check(!c.output_dir.empty(), "output_dir", "must not be empty");
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    check(s.is_array() && !s.empty(), "seeds", "must be a non-empty list");
    c.seeds.clear();
    for (const json& v : s) {
      check(v.is_number_integer() && v.get<long long>() >= 0, "seeds",
            "must hold non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }

  RunConfig& r = c.run;
  r.backbone = field<std::string>(j, "backbone", r.backbone);
  const auto& names = backbone_names();
  check(std::find(names.begin(), names.end(), r.backbone) != names.end(), "backbone",
        "names an unknown backbone '" + r.backbone + "'");
  r.feature_dim = static_cast<Index>(count_field(j, "feature_dim", static_cast<std::size_t>(r.feature_dim)));
  check(r.feature_dim > 0, "feature_dim", "must be positive");
  r.classes_per_phase = static_cast<int>(count_field(j, "classes_per_phase", static_cast<std::size_t>(r.classes_per_phase)));
  check(r.classes_per_phase > 0, "classes_per_phase", "must be positive");
  r.pretrain_class_count = static_cast<int>(count_field(j, "pretrain_class_count", static_cast<std::size_t>(r.pretrain_class_count)));
  r.memory = count_field(j, "memory", r.memory);

  r.loss.preset = field<std::string>(j, "loss", r.loss.preset);
  try {
    (void)distillation_preset(r.loss.preset);
  } catch (const Error&) {
    fail(ErrorCode::kValidation, "config field 'loss' names an unknown loss '" + r.loss.preset + "'");
  }
  const std::string cls = field<std::string>(j, "classification_loss", "bce");
  try {
    r.loss.classification = parse_classification_loss(cls);
  } catch (const Error&) {
    fail(ErrorCode::kValidation, "config field 'classification_loss' names an unknown loss '" + cls + "'");
  }
  const std::string norm = field<std::string>(j, "normalization", std::string(to_string(r.normalization)));
  try {
    r.normalization = parse_normalization(norm);
  } catch (const Error&) {
    fail(ErrorCode::kValidation, "config field 'normalization' names an unknown normalization '" + norm + "'");
  }
  if (const auto spec = r.loss.distillation();
      spec && spec->activation == EdgeActivation::kEuclidean) {
    check(r.normalization != Normalization::kNone, "normalization",
          "must be cn or rectified-cn for loss '" + r.loss.preset + "'");
  }
  r.loss.lambda.lambda_base = field<double>(j, "lambda_base", r.loss.lambda.lambda_base);
  check(r.loss.lambda.lambda_base >= 0.0, "lambda_base", "must be >= 0");
  r.loss.temperature = field<double>(j, "temperature", r.loss.temperature);
  check(r.loss.temperature > 0.0, "temperature", "must be positive");

  OptimizerSchedule& o = r.optimizer;
  o.learning_rate = field<double>(j, "learning_rate", o.learning_rate);
  o.decay_epochs = field<std::vector<int>>(j, "decay_epochs", o.decay_epochs);
  o.decay_factor = field<double>(j, "decay_factor", o.decay_factor);
  o.epochs = static_cast<int>(count_field(j, "epochs", static_cast<std::size_t>(o.epochs)));
  o.batch_size = static_cast<int>(count_field(j, "batch_size", static_cast<std::size_t>(o.batch_size)));
  o.momentum = field<double>(j, "momentum", o.momentum);
  o.weight_decay = field<double>(j, "weight_decay", o.weight_decay);
  o.validate();
  r.renormalize_means = field<bool>(j, "renormalize_means", r.renormalize_means);
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string config_to_json(const ExperimentConfig& c) {
  const RunConfig& r = c.run;
  json j;
  j["dataset"] = c.dataset;
  j["data_root"] = c.data_root;
  j["train_per_class"] = c.train_per_class;
  j["backbone"] = r.backbone;
  j["feature_dim"] = r.feature_dim;
  j["classes_per_phase"] = r.classes_per_phase;
  j["pretrain_class_count"] = r.pretrain_class_count;
  j["seeds"] = c.seeds;
  j["memory"] = r.memory;
  j["loss"] = r.loss.preset;
  j["classification_loss"] = std::string(to_string(r.loss.classification));
  j["normalization"] = std::string(to_string(r.normalization));
  j["lambda_base"] = r.loss.lambda.lambda_base;
  j["temperature"] = r.loss.temperature;
  j["learning_rate"] = r.optimizer.learning_rate;
  j["decay_epochs"] = r.optimizer.decay_epochs;
  j["decay_factor"] = r.optimizer.decay_factor;
  j["epochs"] = r.optimizer.epochs;
  j["batch_size"] = r.optimizer.batch_size;
  j["momentum"] = r.optimizer.momentum;
  j["weight_decay"] = r.optimizer.weight_decay;
  j["renormalize_means"] = r.renormalize_means;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

Dataset load_experiment_dataset(const ExperimentConfig& config) {
  Dataset d;
  if (config.dataset == "blobs") {
    d = make_blobs(BlobsOptions{});
  } else {
    d = load_dataset(config.dataset, config.data_root);
  }
  if (config.train_per_class > 0) d.train = limit_per_class(d.train, config.train_per_class);
  return d;
}

namespace {

json mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
  return json{{"mean", mean}, {"std", sd}, {"values", v}};
}

json columnwise(const std::vector<std::vector<double>>& rows) {
  json out = json::array();
  for (std::size_t i = 0; i < rows.front().size(); ++i) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r[i]);
    out.push_back(mean_std(col));
  }
  return out;
}

}  // namespace

std::string run_experiment(const ExperimentConfig& config) {
  const Dataset dataset = load_experiment_dataset(config);
  const fs::path root(config.output_dir);
  write_file((root / "config.json").string(), config_to_json(config));

  std::vector<MetricsReport> reports;
  for (std::uint64_t seed : config.seeds) {
    const RunResult result = run_incremental(config.run, dataset, seed);
    const fs::path dir = root / ("seed_" + std::to_string(seed));
    write_run_artifacts(result, dataset, dir.string());
    ExperimentConfig resolved = config;
    resolved.seeds = {seed};
    resolved.output_dir = dir.string();
    write_file((dir / "config.json").string(), config_to_json(resolved));
    reports.push_back(compute_report(result.accuracy, &result.class_accuracy));
  }

  std::vector<double> final_acc, avg_acc, mad, forgetting;
  std::vector<std::vector<double>> curves, phases;
  for (const auto& r : reports) {
    final_acc.push_back(r.incremental_accuracy.back());
    avg_acc.push_back(r.average_incremental_accuracy);
    mad.push_back(r.phase_mad);
    if (r.forgetting) forgetting.push_back(*r.forgetting);
    curves.push_back(r.incremental_accuracy);
    phases.push_back(r.phase_accuracy);
  }
  json s;
  s["seeds"] = config.seeds;
  s["final_incremental_accuracy"] = mean_std(final_acc);
  s["average_incremental_accuracy"] = mean_std(avg_acc);
  s["phase_mad"] = mean_std(mad);
  s["forgetting"] = forgetting.empty() ? json() : mean_std(forgetting);
  s["incremental_accuracy"] = columnwise(curves);
  s["phase_accuracy"] = columnwise(phases);
  const std::string text = s.dump(2) + "\n";
  write_file((root / "summary.json").string(), text);
  return text;
}

std::string cmd_run(const std::string& config_path) { return run_experiment(load_config(config_path)); }

namespace {

AccuracyMatrix read_matrix(const fs::path& dir) {
  AccuracyMatrix m;
  const fs::path csv = dir / "accuracy_matrix.csv";
  require(fs::exists(csv), ErrorCode::kIo, "missing " + csv.string());
  m.rows = matrix_from_csv(read_file(csv.string()));
  const fs::path sizes = dir / "group_sizes.csv";
  if (fs::exists(sizes)) {
    std::istringstream in(read_file(sizes.string()));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      require(comma != std::string::npos, ErrorCode::kIo, "garbled group_sizes.csv");
      try {
        m.group_sizes.push_back(static_cast<std::size_t>(std::stoull(line.substr(comma + 1))));
      } catch (const std::exception&) {
        fail(ErrorCode::kIo, "garbled group_sizes.csv");
      }
    }
  }
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kIo, std::string("garbled accuracy matrix: ") + e.what());
  }
  return m;
}

}  // namespace

std::string cmd_metrics(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const AccuracyMatrix m = read_matrix(dir);
  std::vector<std::vector<double>> class_rows;
  if (fs::exists(dir / "class_accuracy.csv")) {
    class_rows = matrix_from_csv(read_file((dir / "class_accuracy.csv").string()));
  }
  return report_to_json(compute_report(m, class_rows.empty() ? nullptr : &class_rows));
}

ToyCommandOptions parse_toy_options(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text.empty() ? std::string("{}") : json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("toy options are not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kValidation, "toy options must be a JSON object");
  static const std::set<std::string> keys = {"k",          "dim",        "norm",     "seeds",
                                             "output_dir", "data_root",  "epochs",
                                             "train_per_class", "restarts"};
  for (const auto& [key, value] : j.items()) {
    require(keys.count(key) != 0, ErrorCode::kValidation, "toy option '" + key + "' is not recognised");
  }
  ToyCommandOptions o;
  o.k = field<int>(j, "k", o.k);
  o.dim = field<int>(j, "dim", o.dim);
  if (j.contains("norm")) {
    const std::string n = field<std::string>(j, "norm", "both");
    if (n == "both") {
      o.normalizations = {"cn", "rectified-cn"};
    } else {
      try {
        o.normalizations = {std::string(to_string(parse_normalization(n)))};
      } catch (const Error&) {
        fail(ErrorCode::kValidation, "toy option 'norm' must be cn, rectified-cn or both");
      }
    }
  }
  o.seeds = field<std::vector<std::uint64_t>>(j, "seeds", o.seeds);
  require(!o.seeds.empty(), ErrorCode::kValidation, "toy option 'seeds' must not be empty");
  o.output_dir = field<std::string>(j, "output_dir", o.output_dir);
  o.data_root = field<std::string>(j, "data_root", o.data_root);
  o.epochs = field<int>(j, "epochs", o.epochs);
  o.train_per_class = count_field(j, "train_per_class", o.train_per_class);
  o.restarts = field<int>(j, "restarts", o.restarts);
  return o;
}

std::string cmd_toy(const std::string& kind, const ToyCommandOptions& o) {
  const fs::path out(o.output_dir);
  json report;
  report["kind"] = kind;
  if (kind == "sim2d") {
    report["k"] = o.k;
    report["dim"] = o.dim;
    for (const auto& name : o.normalizations) {
      const Normalization n = parse_normalization(name);
      json runs = json::array();
      int collapsed = 0;
      for (std::uint64_t seed : o.seeds) {
        FreeFeatureProblem p;
        p.k = o.k;
        p.dim = o.dim;
        p.normalization = n;
        p.restarts = o.restarts;
        const SimulationResult r = run_2d_simulation(p, seed);
        const bool c = r.max_pair_cosine() > kCollapseCosine;
        collapsed += c;
        std::vector<std::vector<double>> cos(static_cast<std::size_t>(o.k));
        for (int i = 0; i < o.k; ++i) {
          for (int k = 0; k < o.k; ++k) cos[static_cast<std::size_t>(i)].push_back(r.pair_cosines(i, k));
        }
        runs.push_back({{"seed", seed},
                        {"initial_loss", r.initial_loss},
                        {"final_loss", r.final_loss},
                        {"eta", r.eta},
                        {"alignment", std::vector<double>(r.alignment.data(), r.alignment.data() + r.alignment.size())},
                        {"min_alignment", r.min_alignment()},
                        {"max_pair_cosine", r.max_pair_cosine()},
                        {"collapsed", c},
                        {"pair_cosines", cos}});
        const Matrix uf = normalize_rows(r.features);
        const Matrix uw = normalize_rows(r.embeddings);
        std::vector<ClassId> labels(static_cast<std::size_t>(o.k));
        for (int i = 0; i < o.k; ++i) labels[static_cast<std::size_t>(i)] = i;
        const Matrix pf = o.dim == 2 ? uf : principal_projection(uf);
        const Matrix pw = o.dim == 2 ? uw : principal_projection(uw);
        write_file((out / ("sim2d_" + name + "_seed" + std::to_string(seed) + ".svg")).string(),
                   svg::scatter("free features, " + name + ", K=" + std::to_string(o.k), pf, labels, &pw));
      }
      report["results"][name] = {{"runs", runs}, {"collapsed_seeds", collapsed}};
    }
  } else if (kind == "mnist") {
    const Dataset d = load_dataset("mnist", o.data_root);
    ToyOptions t;
    t.epochs = o.epochs;
    t.train_per_class = o.train_per_class;
    for (const auto& name : o.normalizations) {
      const Normalization n = parse_normalization(name);
      std::vector<double> scores, untrained;
      for (std::uint64_t seed : o.seeds) {
        const ToyResult r = run_mnist_toy(d, n, seed, t);
        scores.push_back(r.separation);
        untrained.push_back(r.untrained_separation);
        write_file((out / ("mnist_" + name + "_seed" + std::to_string(seed) + ".svg")).string(),
                   svg::scatter("MNIST 3-d features (PCA), " + name, principal_projection(r.test_features),
                                r.test_labels));
      }
      report["results"][name] = {{"seeds", o.seeds},
                                 {"separation", scores},
                                 {"untrained_separation", untrained},
                                 {"mean_separation", mean_std(scores)["mean"]}};
    }
  } else {
    fail(ErrorCode::kInvalidArgument, "toy kind must be mnist or sim2d, got '" + kind + "'");
  }
  const std::string text = report.dump(2) + "\n";
  write_file((out / "report.json").string(), text);
  return text;
}

namespace {

struct PlotRun {
  std::string label;
  std::vector<double> classes_seen;
  std::vector<double> incremental;
  std::vector<double> phase;
  std::vector<int> group_sizes;
};

PlotRun collect(const fs::path& dir) {
  std::vector<fs::path> runs;
  if (fs::exists(dir / "accuracy_matrix.csv")) {
    runs.push_back(dir);
  } else if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && e.path().filename().string().rfind("seed_", 0) == 0 &&
          fs::exists(e.path() / "accuracy_matrix.csv")) {
        runs.push_back(e.path());
      }
    }
    std::sort(runs.begin(), runs.end());
  }
  require(!runs.empty(), ErrorCode::kIo, "no accuracy_matrix.csv under " + dir.string());

  PlotRun p;
  p.label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  for (const auto& r : runs) {
    const PhaseSchedule s = schedule_from_json(read_file((r / "schedule.json").string()));
    std::vector<int> sizes;
    for (const auto& g : s.phase_groups) sizes.push_back(static_cast<int>(g.size()));
    require(p.group_sizes.empty() || p.group_sizes == sizes, ErrorCode::kComparison,
            "runs under " + dir.string() + " use different schedules");
    p.group_sizes = sizes;
    const MetricsReport rep = compute_report(read_matrix(r));
    if (p.incremental.empty()) {
      p.incremental.assign(rep.incremental_accuracy.size(), 0.0);
      p.phase.assign(rep.phase_accuracy.size(), 0.0);
    }
    for (std::size_t j = 0; j < p.incremental.size(); ++j) p.incremental[j] += rep.incremental_accuracy[j];
    for (std::size_t j = 0; j < p.phase.size(); ++j) p.phase[j] += rep.phase_accuracy[j];
  }
  for (double& v : p.incremental) v /= static_cast<double>(runs.size());
  for (double& v : p.phase) v /= static_cast<double>(runs.size());
  double seen = 0;
  for (int g : p.group_sizes) p.classes_seen.push_back(seen += g);
  return p;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

}  // namespace

std::string cmd_plot(const std::vector<std::string>& run_dirs, const std::string& output_dir) {
  require(!run_dirs.empty(), ErrorCode::kInvalidArgument, "plot needs at least one run directory");
  std::vector<PlotRun> runs;
  for (const auto& d : run_dirs) runs.push_back(collect(fs::path(d)));
  for (const auto& r : runs) {
    require(r.group_sizes == runs.front().group_sizes, ErrorCode::kComparison,
            "runs have different schedules (" + std::to_string(r.group_sizes.size()) + " vs " +
                std::to_string(runs.front().group_sizes.size()) + " phases)");
  }
  std::vector<svg::Series> lines, bars;
  for (const auto& r : runs) {
    const double avg = average_incremental_accuracy(r.incremental);
    lines.push_back({r.label + " (" + percent(avg) + ")", r.classes_seen, r.incremental});
    double mean = 0.0;
    for (double v : r.phase) mean += v;
    mean /= static_cast<double>(r.phase.size());
    double mad = 0.0;
    for (double v : r.phase) mad += std::abs(v - mean);
    mad /= static_cast<double>(r.phase.size());
    std::vector<double> idx(r.phase.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
    bars.push_back({r.label + " (" + percent(mad) + ")", idx, r.phase});
  }
  std::vector<std::string> categories;
  for (std::size_t i = 0; i < runs.front().phase.size(); ++i) categories.push_back("phase " + std::to_string(i));

  const fs::path out(output_dir);
  const std::string line_path = (out / "incremental_accuracy.svg").string();
  const std::string bar_path = (out / "phase_accuracy.svg").string();
  write_file(line_path, svg::line_plot("Incremental accuracy", "number of classes", "accuracy", lines));
  write_file(bar_path, svg::bar_plot("Phase accuracy after the last phase", "phase", "accuracy",
                                     categories, bars));
  return json{line_path, bar_path}.dump() + "\n";
}

}  // namespace fgcil
