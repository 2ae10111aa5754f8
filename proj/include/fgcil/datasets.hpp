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

#ifndef FGCIL_DATASETS_HPP
#define FGCIL_DATASETS_HPP

#include <cstdint>
#include <string>

#include "fgcil/data_stream.hpp"

namespace fgcil {

// Environment variable that overrides the configured dataset root.
inline constexpr const char* kDataRootEnv = "FGCIL_DATA_ROOT";

// IDX files (train-images-idx3-ubyte, ...; optionally .gz) under `root`.
Dataset load_mnist(const std::string& root);
// Binary CIFAR-10 batches (data_batch_{1..5}.bin, test_batch.bin).
Dataset load_cifar10(const std::string& root);
// Binary CIFAR-100 (train.bin, test.bin); fine labels.
Dataset load_cifar100(const std::string& root);

struct BlobsOptions {
  int num_classes = 10;
  int dim = 16;
  int train_per_class = 100;
  int test_per_class = 50;
  double spread = 0.5;  // per-coordinate std around unit-scale class centres
  std::uint64_t seed = 0;
};

// Gaussian clusters around random centres; inputs have shape (dim, 1, 1).
Dataset make_blobs(const BlobsOptions& options);

// Dispatches on "mnist", "cifar10", "cifar100". Files are looked up in
// <root>/<name> when that directory exists, else in <root>. The environment
// override wins over `root` when set.
Dataset load_dataset(const std::string& name, const std::string& root);
std::string resolve_data_root(const std::string& configured_root);

// Keeps the first `per_class` examples of every class, preserving order.
DatasetSplit limit_per_class(const DatasetSplit& split, std::size_t per_class);

}  // namespace fgcil

#endif  // FGCIL_DATASETS_HPP
