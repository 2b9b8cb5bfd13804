#!/usr/bin/env python3
"""Builds the IDX files under data/mnist/ from MNIST digits redistributed in
two package-registry artifacts (no direct access to the LeCun mirror needed):

  train: mlxtend's mnist_5k.csv.gz   (5,000 digits, 500 per class)
  test:  npm `mnist` src/digits/*.json (10,000 digits, ~1,000 per class)

Test images that also occur in the training file are dropped.

usage: prepare_mnist.py <mlxtend.whl> <mnist-npm-package-dir> <out-dir>
"""
import gzip
import io
import json
import os
import struct
import sys
import zipfile

import numpy as np


def write_idx(path, images, labels_path, labels):
    n, rows, cols = images.shape
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())
    with gzip.GzipFile(labels_path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(labels.astype(np.uint8).tobytes())


def main(whl, npm_dir, out):
    z = zipfile.ZipFile(whl)
    raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    table = np.loadtxt(io.StringIO(raw), delimiter=",").astype(np.int64)
    train_x = table[:, :-1].astype(np.uint8).reshape(-1, 28, 28)
    train_y = table[:, -1]
    seen = {img.tobytes() for img in train_x}

    test_x, test_y = [], []
    for digit in range(10):
        with open(os.path.join(npm_dir, "src", "digits", f"{digit}.json")) as f:
            data = np.array(json.load(f)["data"], dtype=np.float64)
        imgs = np.rint(data * 255).clip(0, 255).astype(np.uint8).reshape(-1, 28, 28)
        for img in imgs:
            if img.tobytes() not in seen:
                test_x.append(img)
                test_y.append(digit)
    test_x = np.stack(test_x)
    test_y = np.array(test_y)

    os.makedirs(out, exist_ok=True)
    write_idx(os.path.join(out, "train-images-idx3-ubyte.gz"), train_x,
              os.path.join(out, "train-labels-idx1-ubyte.gz"), train_y)
    write_idx(os.path.join(out, "t10k-images-idx3-ubyte.gz"), test_x,
              os.path.join(out, "t10k-labels-idx1-ubyte.gz"), test_y)
    print("train", np.bincount(train_y), "test", np.bincount(test_y))


if __name__ == "__main__":
    main(*sys.argv[1:4])
