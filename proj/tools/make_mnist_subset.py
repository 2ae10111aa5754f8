#!/usr/bin/env python3
# Copyright 2026 The fgcil Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes a 5000-image MNIST subset in the standard IDX (gzip) layout.

The images come from the mnist_5k.csv.gz file bundled with the mlxtend wheel
(500 images per digit). The first `--train-per-class` images of every digit go
to the train split and the rest to the test split, so the output is a drop-in
replacement for the full MNIST files under the same names.

    pip download --no-deps -d /tmp/wheels mlxtend
    python3 tools/make_mnist_subset.py /tmp/wheels/mlxtend-*.whl data/mnist
"""
import argparse
import gzip
import struct
import zipfile
from pathlib import Path


def write_idx_images(path, images):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wheel")
    ap.add_argument("out_dir")
    ap.add_argument("--train-per-class", type=int, default=400)
    args = ap.parse_args()

    with zipfile.ZipFile(args.wheel) as z:
        text = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()

    seen = [0] * 10
    train, test = ([], []), ([], [])
    for line in text.splitlines():
        values = [int(float(v)) for v in line.split(",")]
        pixels, label = values[:-1], values[-1]
        split = train if seen[label] < args.train_per_class else test
        seen[label] += 1
        split[0].append(pixels)
        split[1].append(label)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx_images(out / "train-images-idx3-ubyte.gz", train[0])
    write_idx_labels(out / "train-labels-idx1-ubyte.gz", train[1])
    write_idx_images(out / "t10k-images-idx3-ubyte.gz", test[0])
    write_idx_labels(out / "t10k-labels-idx1-ubyte.gz", test[1])
    print(f"train={len(train[1])} test={len(test[1])} -> {out}")


if __name__ == "__main__":
    main()
