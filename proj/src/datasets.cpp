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

#include "fgcil/datasets.hpp"

#include <zlib.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <map>

#include "fgcil/error.hpp"
#include "fgcil/rng.hpp"

namespace fgcil {

namespace fs = std::filesystem;

namespace {

// Reads a whole file, inflating it when it is gzip-compressed.
std::vector<unsigned char> read_maybe_gz(const fs::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<unsigned char> out;
  std::array<unsigned char, 1 << 16> buf{};
  for (;;) {
    const int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (n < 0) {
      gzclose(f);
      fail(ErrorCode::kIo, "read error in " + path.string());
    }
    if (n == 0) break;
    out.insert(out.end(), buf.begin(), buf.begin() + n);
  }
  gzclose(f);
  return out;
}

fs::path find_file(const fs::path& root, const std::string& name) {
  for (const auto& candidate : {root / name, root / (name + ".gz")}) {
    if (fs::exists(candidate)) return candidate;
  }
  fail(ErrorCode::kIo, "dataset file " + name + " not found under " + root.string());
}

std::uint32_t big_endian32(const std::vector<unsigned char>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

DatasetSplit read_idx_split(const fs::path& root, const std::string& images,
                            const std::string& labels) {
  const auto img = read_maybe_gz(find_file(root, images));
  const auto lab = read_maybe_gz(find_file(root, labels));
  if (img.size() < 16 || big_endian32(img, 0) != 0x00000803) {
    fail(ErrorCode::kIo, images + ": not an IDX image file");
  }
  if (lab.size() < 8 || big_endian32(lab, 0) != 0x00000801) {
    fail(ErrorCode::kIo, labels + ": not an IDX label file");
  }
  const std::size_t count = big_endian32(img, 4);
  const int rows = static_cast<int>(big_endian32(img, 8));
  const int cols = static_cast<int>(big_endian32(img, 12));
  if (big_endian32(lab, 4) != count) fail(ErrorCode::kIo, "IDX image/label counts differ");
  const std::size_t per = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (img.size() < 16 + count * per || lab.size() < 8 + count) {
    fail(ErrorCode::kIo, "truncated IDX file under " + root.string());
  }

  constexpr float kMean = 0.1307f;
  constexpr float kStd = 0.3081f;
  DatasetSplit s;
  s.shape = {1, rows, cols};
  s.pixels.resize(count * per);
  s.labels.resize(count);
  for (std::size_t i = 0; i < count * per; ++i) {
    s.pixels[i] = (static_cast<float>(img[16 + i]) / 255.0f - kMean) / kStd;
  }
  for (std::size_t i = 0; i < count; ++i) s.labels[i] = lab[8 + i];
  return s;
}

// CIFAR binary records: `label_bytes` label bytes (the last one is used)
// followed by 3x32x32 channel-major pixels.
void append_cifar_records(const fs::path& file, int label_bytes, DatasetSplit& split) {
  const auto bytes = read_maybe_gz(file);
  const std::size_t record = static_cast<std::size_t>(label_bytes) + 3072;
  if (bytes.size() % record != 0) fail(ErrorCode::kIo, file.string() + ": truncated record");
  static constexpr std::array<float, 3> kMean = {0.4914f, 0.4822f, 0.4465f};
  static constexpr std::array<float, 3> kStd = {0.2470f, 0.2435f, 0.2616f};
  split.shape = {3, 32, 32};
  for (std::size_t at = 0; at < bytes.size(); at += record) {
    split.labels.push_back(bytes[at + static_cast<std::size_t>(label_bytes) - 1]);
    for (std::size_t p = 0; p < 3072; ++p) {
      const std::size_t channel = p / 1024;
      const float v = static_cast<float>(bytes[at + static_cast<std::size_t>(label_bytes) + p]);
      split.pixels.push_back((v / 255.0f - kMean[channel]) / kStd[channel]);
    }
  }
}

}  // namespace

Dataset load_mnist(const std::string& root) {
  Dataset d;
  d.name = "mnist";
  d.root = root;
  d.num_classes = 10;
  d.train = read_idx_split(root, "train-images-idx3-ubyte", "train-labels-idx1-ubyte");
  d.test = read_idx_split(root, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte");
  return d;
}

Dataset load_cifar10(const std::string& root) {
  Dataset d;
  d.name = "cifar10";
  d.root = root;
  d.num_classes = 10;
  for (int b = 1; b <= 5; ++b) {
    append_cifar_records(find_file(root, "data_batch_" + std::to_string(b) + ".bin"), 1,
                         d.train);
  }
  append_cifar_records(find_file(root, "test_batch.bin"), 1, d.test);
  return d;
}

Dataset load_cifar100(const std::string& root) {
  Dataset d;
  d.name = "cifar100";
  d.root = root;
  d.num_classes = 100;
  append_cifar_records(find_file(root, "train.bin"), 2, d.train);
  append_cifar_records(find_file(root, "test.bin"), 2, d.test);
  return d;
}

Dataset make_blobs(const BlobsOptions& options) {
  require(options.num_classes > 0 && options.dim > 0, ErrorCode::kInput,
          "blobs need positive class count and dimension");
  Rng rng(derive_seed({options.seed, 0xB10B5ull}));
  std::vector<std::vector<double>> centres(static_cast<std::size_t>(options.num_classes));
  for (auto& c : centres) {
    c.resize(static_cast<std::size_t>(options.dim));
    for (auto& v : c) v = standard_normal(rng);
  }
  auto fill = [&](DatasetSplit& split, int per_class) {
    split.shape = {options.dim, 1, 1};
    for (int k = 0; k < per_class; ++k) {
      for (int c = 0; c < options.num_classes; ++c) {
        split.labels.push_back(c);
        for (double v : centres[static_cast<std::size_t>(c)]) {
          split.pixels.push_back(static_cast<float>(v + options.spread * standard_normal(rng)));
        }
      }
    }
  };
  Dataset d;
  d.name = "blobs";
  d.num_classes = options.num_classes;
  fill(d.train, options.train_per_class);
  fill(d.test, options.test_per_class);
  return d;
}

std::string resolve_data_root(const std::string& configured_root) {
  if (const char* env = std::getenv(kDataRootEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return configured_root;
}

Dataset load_dataset(const std::string& name, const std::string& root) {
  const fs::path base = resolve_data_root(root);
  const std::string r = fs::is_directory(base / name) ? (base / name).string() : base.string();
  if (name == "mnist") return load_mnist(r);
  if (name == "cifar10") return load_cifar10(r);
  if (name == "cifar100") return load_cifar100(r);
  fail(ErrorCode::kValidation, "unknown dataset '" + name + "'");
}

DatasetSplit limit_per_class(const DatasetSplit& split, std::size_t per_class) {
  DatasetSplit out;
  out.shape = split.shape;
  std::map<ClassId, std::size_t> taken;
  const std::size_t width = split.shape.size();
  for (std::size_t k = 0; k < split.size(); ++k) {
    if (taken[split.labels[k]]++ >= per_class) continue;
    out.labels.push_back(split.labels[k]);
    const auto in = split.input(k);
    out.pixels.insert(out.pixels.end(), in.begin(), in.begin() + static_cast<std::ptrdiff_t>(width));
  }
  return out;
}

}  // namespace fgcil
