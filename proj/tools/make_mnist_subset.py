#!/usr/bin/env python3
# Copyright 2026 The bqfl-sim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes IDX train/test files from the 5000-sample MNIST subset bundled
with the mlxtend wheel (500 images per digit).

The first 400 images of each digit go to the training split and the last
100 to the test split. Each split is then shuffled with a fixed seed so
the class order resembles the official files.

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 tools/make_mnist_subset.py /tmp/mlx/mlxtend-*.whl data/mnist-5k
"""
import gzip
import os
import random
import struct
import sys
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
TRAIN_PER_CLASS = 400


def write_idx(directory, prefix, rows):
    with open(os.path.join(directory, f"{prefix}-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        for pixels, _ in rows:
            f.write(bytes(pixels))
    with open(os.path.join(directory, f"{prefix}-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(rows)))
        f.write(bytes(label for _, label in rows))


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    wheel, out = sys.argv[1], sys.argv[2]
    text = gzip.decompress(zipfile.ZipFile(wheel).read(MEMBER)).decode()
    seen = [0] * 10
    train, test = [], []
    for line in text.strip().splitlines():
        fields = [int(float(v)) for v in line.split(",")]
        pixels, label = fields[:-1], fields[-1]
        assert len(pixels) == 784 and 0 <= label <= 9
        (train if seen[label] < TRAIN_PER_CLASS else test).append((pixels, label))
        seen[label] += 1
    random.Random(20230601).shuffle(train)
    random.Random(20230602).shuffle(test)
    os.makedirs(out, exist_ok=True)
    write_idx(out, "train", train)
    write_idx(out, "t10k", test)
    print(f"train={len(train)} test={len(test)} -> {out}")


if __name__ == "__main__":
    main()
