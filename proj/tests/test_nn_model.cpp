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

#include <cstdio>
#include <filesystem>

#include "fgcil/error.hpp"
#include "fgcil/model.hpp"
#include "fgcil/nn.hpp"
#include "test_util.hpp"

namespace fgcil {
namespace {

// Checks d(sum(probe * layer(x)))/dx and the parameter gradients.
void check_layer(Layer& layer, Matrix x, Rng& rng) {
  LayerCache cache;
  const Matrix y = layer.forward(x, &cache);
  const Matrix probe = testing::random_matrix(y.rows(), y.cols(), rng);
  for (Parameter* p : layer.parameters()) p->grad.setZero();
  const Matrix dx = layer.backward(probe, cache);
  auto value = [&] { return (layer.forward(x, nullptr).array() * probe.array()).sum(); };
  EXPECT_LT(testing::relative_error(dx, testing::numeric_gradient(x, value)), 1e-6);
  for (Parameter* p : layer.parameters()) {
    const Matrix analytic = p->grad;
    EXPECT_LT(testing::relative_error(analytic, testing::numeric_gradient(p->value, value)), 1e-6);
  }
}

TEST(Layers, LinearGradient) {
  Rng rng(1);
  Linear l(4, 3, rng);
  check_layer(l, testing::random_matrix(5, 4, rng), rng);
}

TEST(Layers, ConvGradient) {
  Rng rng(2);
  Conv2d c({2, 6, 5}, 3, 3, 1, rng);
  EXPECT_EQ(c.output_shape(), (TensorShape{3, 6, 5}));
  check_layer(c, testing::random_matrix(2, 60, rng), rng);
}

TEST(Layers, ReluGradient) {
  Rng rng(3);
  Relu r;
  check_layer(r, testing::random_matrix(4, 6, rng), rng);
}

TEST(Layers, MaxPoolGradient) {
  Rng rng(4);
  MaxPool2 p({2, 4, 5});
  EXPECT_EQ(p.output_shape(), (TensorShape{2, 2, 2}));
  check_layer(p, testing::random_matrix(3, 40, rng), rng);
}

TEST(Layers, ConvMatchesDirectSum) {
  Rng rng(5);
  Conv2d c({1, 4, 4}, 1, 3, 0, rng);
  const Matrix x = testing::random_matrix(1, 16, rng);
  const Matrix y = c.forward(x, nullptr);
  Parameter* w = c.parameters()[0];
  Parameter* b = c.parameters()[1];
  for (int oy = 0; oy < 2; ++oy) {
    for (int ox = 0; ox < 2; ++ox) {
      double s = b->value(0, 0);
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) s += w->value(0, ky * 3 + kx) * x(0, (oy + ky) * 4 + ox + kx);
      }
      EXPECT_NEAR(y(0, oy * 2 + ox), s, 1e-12);
    }
  }
}

TEST(Backbone, SmallCnnGradient) {
  Rng rng(6);
  Backbone b = make_backbone("small-cnn", {1, 16, 16}, 5, rng);
  EXPECT_EQ(b.feature_dim(), 5);
  Matrix x = testing::random_matrix(2, 256, rng);
  std::vector<LayerCache> tape;
  const Matrix f = b.forward(x, &tape);
  const Matrix probe = testing::random_matrix(f.rows(), f.cols(), rng);
  for (Parameter* p : b.parameters()) p->grad.setZero();
  const Matrix dx = b.backward(probe, tape);
  auto value = [&] { return (b.forward(x).array() * probe.array()).sum(); };
  EXPECT_LT(testing::relative_error(dx, testing::numeric_gradient(x, value)), 1e-5);
  Parameter* last = b.parameters().back();
  const Matrix analytic = last->grad;
  EXPECT_LT(testing::relative_error(analytic, testing::numeric_gradient(last->value, value)), 1e-6);
}

TEST(Backbone, MnistToyHasThreeFeatures) {
  Rng rng(7);
  EXPECT_EQ(make_backbone("mnist-toy", {1, 28, 28}, 64, rng).feature_dim(), 3);
}

TEST(Backbone, FeatureOutputKeepsNegativeValues) {
  Rng rng(8);
  const Backbone b = make_backbone("mlp", {6, 1, 1}, 4, rng);
  const Matrix f = b.forward(testing::random_matrix(50, 6, rng));
  EXPECT_LT(f.minCoeff(), 0.0);
}

TEST(Backbone, UnknownNameIsValidationError) {
  Rng rng(9);
  try {
    make_backbone("resnet32-class", {3, 32, 32}, 64, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
}

Model small_model(Rng& rng, Normalization n = Normalization::kRectifiedCosine) {
  Model m(make_backbone("mlp", {6, 1, 1}, 4, rng), n);
  const std::vector<ClassId> c{3, 1, 4};
  extend_head(m, c, rng);
  return m;
}

TEST(Head, ExtendAppendsRows) {
  Rng rng(10);
  Model m = small_model(rng);
  const Matrix before = m.head_weights();
  const std::vector<ClassId> more{0, 2};
  extend_head(m, more, rng);
  EXPECT_EQ(m.class_count(), 5);
  EXPECT_EQ(m.head_weights().topRows(3), before);
  EXPECT_EQ(m.head_biases()(3), 0.0);
  EXPECT_EQ(m.row_of(2), 4);
}

TEST(Head, ExtendErrors) {
  Rng rng(11);
  Model m = small_model(rng);
  try {
    extend_head(m, std::vector<ClassId>{}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kHead);
  }
  EXPECT_THROW(extend_head(m, std::vector<ClassId>{5, 1}, rng), Error);
  EXPECT_EQ(m.class_count(), 3);
}

TEST(Head, InitIsSmallSymmetricUniform) {
  Rng rng(12);
  Model m(make_backbone("mlp", {6, 1, 1}, 16, rng), Normalization::kCosine);
  std::vector<ClassId> c(400);
  for (int i = 0; i < 400; ++i) c[static_cast<std::size_t>(i)] = i;
  extend_head(m, c, rng);
  const Matrix& w = m.head_weights();
  const double bound = 0.25;
  EXPECT_LE(w.cwiseAbs().maxCoeff(), bound);
  EXPECT_NEAR(w.mean(), 0.0, 0.01);
  // variance of U(-a, a) is a^2 / 3
  const double var = (w.array() - w.mean()).square().mean();
  EXPECT_NEAR(var, bound * bound / 3.0, 0.002);
}

TEST(Snapshot, EqualAtCreationAndIsolatedAfter) {
  Rng rng(13);
  Model m = small_model(rng);
  const Matrix probe = testing::random_matrix(7, 6, rng);
  const ModelSnapshot s = snapshot(m);
  EXPECT_EQ(s.features(probe), m.features(probe));
  EXPECT_EQ(s.features(probe), s.features(probe));
  const auto hash = s.model().parameter_hash();

  for (Parameter* p : m.parameters()) p->value.array() += 0.01;
  EXPECT_GT((s.features(probe) - m.features(probe)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(s.model().parameter_hash(), hash);
}

TEST(Checkpoint, RoundTrip) {
  Rng rng(14);
  const Model m = small_model(rng);
  const auto path = (std::filesystem::temp_directory_path() / "fgcil_model_test.bin").string();
  save_checkpoint(m, path);
  const Model back = load_checkpoint(path);
  EXPECT_EQ(back.parameter_hash(), m.parameter_hash());
  EXPECT_EQ(back.classes(), m.classes());
  EXPECT_EQ(back.normalization(), m.normalization());
  std::remove(path.c_str());
  EXPECT_THROW(load_checkpoint(path), Error);
}

}  // namespace
}  // namespace fgcil
