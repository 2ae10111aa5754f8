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

#ifndef FGCIL_NN_HPP
#define FGCIL_NN_HPP

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fgcil/data_stream.hpp"
#include "fgcil/rng.hpp"
#include "fgcil/types.hpp"

namespace fgcil {

struct Parameter {
  Matrix value;
  Matrix grad;
  Matrix velocity;
  bool decay = true;

  explicit Parameter(Matrix v = {})
      : value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())),
        velocity(Matrix::Zero(value.rows(), value.cols())) {}
};

// Per-layer intermediates from a forward pass, consumed by backward.
struct LayerCache {
  Matrix input;
  Matrix aux;
  std::vector<Index> indices;
};

// Layers map a batch (N x in) to (N x out). Forward is const; backward
// accumulates into the parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Matrix forward(const Matrix& x, LayerCache* cache) const = 0;
  virtual Matrix backward(const Matrix& dy, const LayerCache& cache) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

class Linear final : public Layer {
 public:
  Linear(Index in, Index out, Rng& rng);
  Matrix forward(const Matrix& x, LayerCache* cache) const override;
  Matrix backward(const Matrix& dy, const LayerCache& cache) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Linear>(*this); }

 private:
  Parameter weight_;  // out x in
  Parameter bias_;    // 1 x out
};

// Stride-1 convolution over channel-major images.
class Conv2d final : public Layer {
 public:
  Conv2d(TensorShape in, int out_channels, int kernel, int padding, Rng& rng);
  TensorShape output_shape() const { return out_; }
  Matrix forward(const Matrix& x, LayerCache* cache) const override;
  Matrix backward(const Matrix& dy, const LayerCache& cache) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

 private:
  TensorShape in_;
  TensorShape out_;
  int kernel_;
  int padding_;
  Parameter weight_;  // out_channels x (in_channels * k * k)
  Parameter bias_;    // 1 x out_channels
};

class Relu final : public Layer {
 public:
  Matrix forward(const Matrix& x, LayerCache* cache) const override;
  Matrix backward(const Matrix& dy, const LayerCache& cache) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
};

// 2x2 max pooling, stride 2; odd trailing rows/columns are dropped.
class MaxPool2 final : public Layer {
 public:
  explicit MaxPool2(TensorShape in);
  TensorShape output_shape() const { return out_; }
  Matrix forward(const Matrix& x, LayerCache* cache) const override;
  Matrix backward(const Matrix& dy, const LayerCache& cache) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2>(*this); }

 private:
  TensorShape in_;
  TensorShape out_;
};

// Feature extractor. The last layer is linear: there is no nonlinearity on
// the feature output.
class Backbone {
 public:
  Backbone() = default;
  Backbone(std::string name, TensorShape input, Index feature_dim,
           std::vector<std::unique_ptr<Layer>> layers);
  Backbone(const Backbone& other);
  Backbone& operator=(const Backbone& other);
  Backbone(Backbone&&) noexcept = default;
  Backbone& operator=(Backbone&&) noexcept = default;

  const std::string& name() const { return name_; }
  TensorShape input_shape() const { return input_; }
  Index feature_dim() const { return feature_dim_; }

  Matrix forward(const Matrix& inputs, std::vector<LayerCache>* tape = nullptr) const;
  // Returns dL/dinputs and accumulates parameter gradients.
  Matrix backward(const Matrix& d_features, const std::vector<LayerCache>& tape);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  std::string name_;
  TensorShape input_;
  Index feature_dim_ = 0;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// "small-cnn" (2 conv + 2 fc), "mnist-toy" (2 conv + 3 fc, d = 3) and
// "mlp" (one hidden layer). `feature_dim` is ignored by mnist-toy.
Backbone make_backbone(const std::string& name, TensorShape input, Index feature_dim, Rng& rng);
const std::vector<std::string>& backbone_names();

// Stacks example inputs into an N x input_size batch.
Matrix stack_inputs(std::span<const LabeledExample> examples);

}  // namespace fgcil

#endif  // FGCIL_NN_HPP
