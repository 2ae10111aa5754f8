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

#include "fgcil/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "fgcil/error.hpp"

namespace fgcil {

Model::Model(Backbone backbone, Normalization normalization)
    : backbone_(std::move(backbone)),
      normalization_(normalization),
      weights_(Matrix(0, backbone_.feature_dim())),
      biases_(Matrix(1, 0)),
      eta_(Matrix::Constant(1, 1, 1.0)) {
  biases_.decay = false;
  eta_.decay = false;
}

Index Model::row_of(ClassId c) const {
  for (std::size_t i = 0; i < class_ids_.size(); ++i) {
    if (class_ids_[i] == c) return static_cast<Index>(i);
  }
  fail(ErrorCode::kLabel, "class " + std::to_string(c) + " is not in the head");
}

ClassEmbedding Model::embedding(Index row) const {
  return {weights_.value.row(row).transpose(), biases_.value(0, row)};
}

Matrix Model::features(const Matrix& inputs) const { return backbone_.forward(inputs); }

EdgeTable Model::edges(const Matrix& features) const {
  return EdgeTable::compute(normalization_, features, weights_.value, head_biases());
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out = backbone_.parameters();
  out.push_back(&weights_);
  out.push_back(&biases_);
  out.push_back(&eta_);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  std::vector<const Parameter*> out = backbone_.parameters();
  out.push_back(&weights_);
  out.push_back(&biases_);
  out.push_back(&eta_);
  return out;
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->grad.setZero();
}

void Model::add_classes(std::span<const ClassId> new_classes, Rng& rng) {
  const Index d = backbone_.feature_dim();
  const Index old_rows = class_count();
  const Index added = static_cast<Index>(new_classes.size());
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));

  Matrix w(old_rows + added, d);
  w.topRows(old_rows) = weights_.value;
  for (Index r = old_rows; r < old_rows + added; ++r) {
    for (Index j = 0; j < d; ++j) w(r, j) = uniform(rng, -bound, bound);
  }
  Matrix b = Matrix::Zero(1, old_rows + added);
  b.leftCols(old_rows) = biases_.value;

  auto grow = [](Parameter& p, Matrix value) {
    const bool decay = p.decay;
    Matrix velocity = Matrix::Zero(value.rows(), value.cols());
    velocity.topLeftCorner(p.velocity.rows(), p.velocity.cols()) = p.velocity;
    p = Parameter(std::move(value));
    p.velocity = std::move(velocity);
    p.decay = decay;
  };
  grow(weights_, std::move(w));
  grow(biases_, std::move(b));
  class_ids_.insert(class_ids_.end(), new_classes.begin(), new_classes.end());
}

std::uint64_t Model::parameter_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Parameter* p : parameters()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p->value.data());
    for (std::size_t i = 0; i < static_cast<std::size_t>(p->value.size()) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

void extend_head(Model& model, std::span<const ClassId> new_classes, Rng& rng) {
  require(!new_classes.empty(), ErrorCode::kHead, "a phase must add at least one class");
  std::set<ClassId> seen(model.classes().begin(), model.classes().end());
  for (ClassId c : new_classes) {
    if (!seen.insert(c).second) {
      fail(ErrorCode::kHead, "class " + std::to_string(c) + " is already in the head");
    }
  }
  model.add_classes(new_classes, rng);
}

EdgeSnapshot ModelSnapshot::edges(const DistillationSpec& spec, const Matrix& inputs) const {
  const EdgeTable table = model_.edges(model_.features(inputs));
  return EdgeSnapshot::capture(spec,
                               distillation_activations(spec, table, model_.class_count()));
}

ModelSnapshot snapshot(const Model& model) { return ModelSnapshot(model); }

namespace {

constexpr char kMagic[8] = {'F', 'G', 'C', 'I', 'L', 'C', 'K', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) fail(ErrorCode::kIo, "truncated checkpoint");
  return v;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
  const std::uint64_t n = read_u64(in);
  if (n > (1u << 20)) fail(ErrorCode::kIo, "corrupt checkpoint string");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) fail(ErrorCode::kIo, "truncated checkpoint");
  return s;
}

}  // namespace

// Layout: magic, backbone name, input shape, feature dim, normalization,
// class ids, then every parameter as (rows, cols, row-major doubles).
void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write checkpoint " + path);
  out.write(kMagic, sizeof kMagic);
  const Backbone& b = model.backbone();
  write_string(out, b.name());
  write_u64(out, static_cast<std::uint64_t>(b.input_shape().channels));
  write_u64(out, static_cast<std::uint64_t>(b.input_shape().height));
  write_u64(out, static_cast<std::uint64_t>(b.input_shape().width));
  write_u64(out, static_cast<std::uint64_t>(b.feature_dim()));
  write_string(out, std::string(to_string(model.normalization())));
  write_u64(out, model.classes().size());
  for (ClassId c : model.classes()) write_u64(out, static_cast<std::uint64_t>(c));
  for (const Parameter* p : model.parameters()) {
    write_u64(out, static_cast<std::uint64_t>(p->value.rows()));
    write_u64(out, static_cast<std::uint64_t>(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) fail(ErrorCode::kIo, "failed writing checkpoint " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    fail(ErrorCode::kIo, path + " is not a checkpoint");
  }
  const std::string name = read_string(in);
  TensorShape shape;
  shape.channels = static_cast<int>(read_u64(in));
  shape.height = static_cast<int>(read_u64(in));
  shape.width = static_cast<int>(read_u64(in));
  const auto feature_dim = static_cast<Index>(read_u64(in));
  const Normalization norm = parse_normalization(read_string(in));
  const std::uint64_t classes = read_u64(in);
  std::vector<ClassId> ids;
  for (std::uint64_t i = 0; i < classes; ++i) ids.push_back(static_cast<ClassId>(read_u64(in)));

  Rng rng(0);
  Model model(make_backbone(name, shape, feature_dim, rng), norm);
  model.add_classes(ids, rng);
  for (Parameter* p : model.parameters()) {
    const auto rows = static_cast<Index>(read_u64(in));
    const auto cols = static_cast<Index>(read_u64(in));
    if (rows != p->value.rows() || cols != p->value.cols()) {
      fail(ErrorCode::kIo, "checkpoint parameter shape mismatch in " + path);
    }
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    if (!in) fail(ErrorCode::kIo, "truncated checkpoint " + path);
  }
  return model;
}

}  // namespace fgcil
