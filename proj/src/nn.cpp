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

#include "fgcil/nn.hpp"

#include <cmath>
#include <limits>

#include "fgcil/error.hpp"

namespace fgcil {

namespace {

// Default PyTorch-style init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Matrix uniform_init(Index rows, Index cols, Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -bound, bound);
  return m;
}

}  // namespace

Linear::Linear(Index in, Index out, Rng& rng)
    : weight_(uniform_init(out, in, in, rng)), bias_(uniform_init(1, out, in, rng)) {}

Matrix Linear::forward(const Matrix& x, LayerCache* cache) const {
  require(x.cols() == weight_.value.cols(), ErrorCode::kContract, "linear: input width mismatch");
  Matrix y = x * weight_.value.transpose();
  y.rowwise() += bias_.value.row(0);
  if (cache) cache->input = x;
  return y;
}

Matrix Linear::backward(const Matrix& dy, const LayerCache& cache) {
  weight_.grad.noalias() += dy.transpose() * cache.input;
  bias_.grad.row(0) += dy.colwise().sum();
  return dy * weight_.value;
}

Conv2d::Conv2d(TensorShape in, int out_channels, int kernel, int padding, Rng& rng)
    : in_(in),
      out_{out_channels, in.height + 2 * padding - kernel + 1,
           in.width + 2 * padding - kernel + 1},
      kernel_(kernel),
      padding_(padding) {
  require(out_.height > 0 && out_.width > 0, ErrorCode::kContract,
          "conv: kernel larger than input");
  const Index fan_in = static_cast<Index>(in.channels) * kernel * kernel;
  weight_ = Parameter(uniform_init(out_channels, fan_in, fan_in, rng));
  bias_ = Parameter(uniform_init(1, out_channels, fan_in, rng));
}

Matrix Conv2d::forward(const Matrix& x, LayerCache* cache) const {
  require(x.cols() == static_cast<Index>(in_.size()), ErrorCode::kContract,
          "conv: input width mismatch");
  const Index n = x.rows();
  const Index positions = static_cast<Index>(out_.height) * out_.width;
  const Index patch = static_cast<Index>(in_.channels) * kernel_ * kernel_;
  Matrix cols = Matrix::Zero(n * positions, patch);
  for (Index s = 0; s < n; ++s) {
    const double* img = x.row(s).data();
    for (int oh = 0; oh < out_.height; ++oh) {
      for (int ow = 0; ow < out_.width; ++ow) {
        double* dst = cols.row(s * positions + oh * out_.width + ow).data();
        Index col = 0;
        for (int c = 0; c < in_.channels; ++c) {
          for (int kh = 0; kh < kernel_; ++kh) {
            const int ih = oh + kh - padding_;
            for (int kw = 0; kw < kernel_; ++kw, ++col) {
              const int iw = ow + kw - padding_;
              if (ih < 0 || ih >= in_.height || iw < 0 || iw >= in_.width) continue;
              dst[col] = img[(static_cast<Index>(c) * in_.height + ih) * in_.width + iw];
            }
          }
        }
      }
    }
  }
  const Matrix prod = cols * weight_.value.transpose();  // (n * positions) x out_channels
  Matrix y(n, static_cast<Index>(out_.size()));
  for (Index s = 0; s < n; ++s) {
    for (int o = 0; o < out_.channels; ++o) {
      const double b = bias_.value(0, o);
      double* dst = y.row(s).data() + static_cast<Index>(o) * positions;
      for (Index p = 0; p < positions; ++p) dst[p] = prod(s * positions + p, o) + b;
    }
  }
  if (cache) cache->aux = std::move(cols);
  return y;
}

Matrix Conv2d::backward(const Matrix& dy, const LayerCache& cache) {
  const Index n = dy.rows();
  const Index positions = static_cast<Index>(out_.height) * out_.width;
  Matrix dprod(n * positions, out_.channels);
  for (Index s = 0; s < n; ++s) {
    for (int o = 0; o < out_.channels; ++o) {
      const double* src = dy.row(s).data() + static_cast<Index>(o) * positions;
      for (Index p = 0; p < positions; ++p) dprod(s * positions + p, o) = src[p];
    }
  }
  weight_.grad.noalias() += dprod.transpose() * cache.aux;
  bias_.grad.row(0) += dprod.colwise().sum();
  const Matrix dcols = dprod * weight_.value;

  Matrix dx = Matrix::Zero(n, static_cast<Index>(in_.size()));
  for (Index s = 0; s < n; ++s) {
    double* img = dx.row(s).data();
    for (int oh = 0; oh < out_.height; ++oh) {
      for (int ow = 0; ow < out_.width; ++ow) {
        const double* src = dcols.row(s * positions + oh * out_.width + ow).data();
        Index col = 0;
        for (int c = 0; c < in_.channels; ++c) {
          for (int kh = 0; kh < kernel_; ++kh) {
            const int ih = oh + kh - padding_;
            for (int kw = 0; kw < kernel_; ++kw, ++col) {
              const int iw = ow + kw - padding_;
              if (ih < 0 || ih >= in_.height || iw < 0 || iw >= in_.width) continue;
              img[(static_cast<Index>(c) * in_.height + ih) * in_.width + iw] += src[col];
            }
          }
        }
      }
    }
  }
  return dx;
}

Matrix Relu::forward(const Matrix& x, LayerCache* cache) const {
  Matrix y = x.cwiseMax(0.0);
  if (cache) cache->aux = y;
  return y;
}

Matrix Relu::backward(const Matrix& dy, const LayerCache& cache) {
  return (cache.aux.array() > 0.0).select(dy, 0.0);
}

MaxPool2::MaxPool2(TensorShape in) : in_(in), out_{in.channels, in.height / 2, in.width / 2} {
  require(out_.height > 0 && out_.width > 0, ErrorCode::kContract, "pool: input too small");
}

Matrix MaxPool2::forward(const Matrix& x, LayerCache* cache) const {
  const Index n = x.rows();
  const Index out_size = static_cast<Index>(out_.size());
  Matrix y(n, out_size);
  std::vector<Index> arg(cache ? static_cast<std::size_t>(n * out_size) : 0);
  for (Index s = 0; s < n; ++s) {
    const double* img = x.row(s).data();
    for (int c = 0; c < out_.channels; ++c) {
      for (int oh = 0; oh < out_.height; ++oh) {
        for (int ow = 0; ow < out_.width; ++ow) {
          Index best = -1;
          double best_v = -std::numeric_limits<double>::infinity();
          for (int dh = 0; dh < 2; ++dh) {
            for (int dw = 0; dw < 2; ++dw) {
              const Index at = (static_cast<Index>(c) * in_.height + 2 * oh + dh) * in_.width +
                               2 * ow + dw;
              if (img[at] > best_v || best < 0) {
                best_v = img[at];
                best = at;
              }
            }
          }
          const Index o = (static_cast<Index>(c) * out_.height + oh) * out_.width + ow;
          y(s, o) = best_v;
          if (cache) arg[static_cast<std::size_t>(s * out_size + o)] = best;
        }
      }
    }
  }
  if (cache) cache->indices = std::move(arg);
  return y;
}

Matrix MaxPool2::backward(const Matrix& dy, const LayerCache& cache) {
  const Index n = dy.rows();
  const Index out_size = static_cast<Index>(out_.size());
  Matrix dx = Matrix::Zero(n, static_cast<Index>(in_.size()));
  for (Index s = 0; s < n; ++s) {
    for (Index o = 0; o < out_size; ++o) {
      dx(s, cache.indices[static_cast<std::size_t>(s * out_size + o)]) += dy(s, o);
    }
  }
  return dx;
}

Backbone::Backbone(std::string name, TensorShape input, Index feature_dim,
                   std::vector<std::unique_ptr<Layer>> layers)
    : name_(std::move(name)), input_(input), feature_dim_(feature_dim), layers_(std::move(layers)) {}

Backbone::Backbone(const Backbone& other)
    : name_(other.name_), input_(other.input_), feature_dim_(other.feature_dim_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Backbone& Backbone::operator=(const Backbone& other) {
  if (this != &other) {
    Backbone copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Matrix Backbone::forward(const Matrix& inputs, std::vector<LayerCache>* tape) const {
  require(inputs.cols() == static_cast<Index>(input_.size()), ErrorCode::kContract,
          "backbone '" + name_ + "' expects inputs of size " + std::to_string(input_.size()));
  if (tape) tape->assign(layers_.size(), LayerCache{});
  Matrix x = inputs;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x, tape ? &(*tape)[i] : nullptr);
  }
  return x;
}

Matrix Backbone::backward(const Matrix& d_features, const std::vector<LayerCache>& tape) {
  require(tape.size() == layers_.size(), ErrorCode::kContract, "backward without a forward tape");
  Matrix g = d_features;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, tape[i]);
  return g;
}

std::vector<Parameter*> Backbone::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    for (Parameter* p : l->parameters()) out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> Backbone::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_) {
    for (Parameter* p : l->parameters()) out.push_back(p);
  }
  return out;
}

const std::vector<std::string>& backbone_names() {
  static const std::vector<std::string> names = {"small-cnn", "mnist-toy", "mlp"};
  return names;
}

Backbone make_backbone(const std::string& name, TensorShape input, Index feature_dim, Rng& rng) {
  std::vector<std::unique_ptr<Layer>> layers;
  if (name == "small-cnn" || name == "mnist-toy") {
    auto conv1 = std::make_unique<Conv2d>(input, 8, 5, 0, rng);
    auto pool1 = std::make_unique<MaxPool2>(conv1->output_shape());
    auto conv2 = std::make_unique<Conv2d>(pool1->output_shape(), 16, 5, 0, rng);
    auto pool2 = std::make_unique<MaxPool2>(conv2->output_shape());
    const Index flat = static_cast<Index>(pool2->output_shape().size());
    layers.push_back(std::move(conv1));
    layers.push_back(std::make_unique<Relu>());
    layers.push_back(std::move(pool1));
    layers.push_back(std::move(conv2));
    layers.push_back(std::make_unique<Relu>());
    layers.push_back(std::move(pool2));
    if (name == "small-cnn") {
      require(feature_dim > 0, ErrorCode::kValidation, "feature_dim must be positive");
      layers.push_back(std::make_unique<Linear>(flat, 128, rng));
      layers.push_back(std::make_unique<Relu>());
      layers.push_back(std::make_unique<Linear>(128, feature_dim, rng));
    } else {
      feature_dim = 3;
      layers.push_back(std::make_unique<Linear>(flat, 64, rng));
      layers.push_back(std::make_unique<Relu>());
      layers.push_back(std::make_unique<Linear>(64, 32, rng));
      layers.push_back(std::make_unique<Relu>());
      layers.push_back(std::make_unique<Linear>(32, feature_dim, rng));
    }
  } else if (name == "mlp") {
    require(feature_dim > 0, ErrorCode::kValidation, "feature_dim must be positive");
    const auto in = static_cast<Index>(input.size());
    layers.push_back(std::make_unique<Linear>(in, 64, rng));
    layers.push_back(std::make_unique<Relu>());
    layers.push_back(std::make_unique<Linear>(64, feature_dim, rng));
  } else {
    fail(ErrorCode::kValidation, "unknown or unsupported backbone '" + name + "'");
  }
  return Backbone(name, input, feature_dim, std::move(layers));
}

Matrix stack_inputs(std::span<const LabeledExample> examples) {
  if (examples.empty()) return Matrix(0, 0);
  const auto width = static_cast<Index>(examples.front().input.size());
  Matrix m(static_cast<Index>(examples.size()), width);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    require(static_cast<Index>(examples[i].input.size()) == width, ErrorCode::kInput,
            "examples have different input sizes");
    for (Index j = 0; j < width; ++j) m(static_cast<Index>(i), j) = examples[i].input[j];
  }
  return m;
}

}  // namespace fgcil
