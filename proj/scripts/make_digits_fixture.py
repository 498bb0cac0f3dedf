"""Writes the bundled 8x8 digits as IDX files under data/digits.

The images come from scikit-learn's copy of the UCI optical digits set
(1797 images, pixel levels 0..16), rescaled to 0..255. The first 1297
images of a seeded permutation become the training set, the rest the test set.
"""

import argparse
import pathlib
import struct

import numpy as np
from sklearn.datasets import load_digits


def write_images(path, images):
    count, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, count, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/digits")
    parser.add_argument("--test", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    digits = load_digits()
    images = np.rint(digits.images * 255.0 / 16.0).astype(np.uint8)
    order = np.random.default_rng(args.seed).permutation(len(images))
    test, train = order[: args.test], order[args.test :]

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_images(out / "train-images-idx3-ubyte", images[train])
    write_labels(out / "train-labels-idx1-ubyte", digits.target[train])
    write_images(out / "test-images-idx3-ubyte", images[test])
    write_labels(out / "test-labels-idx1-ubyte", digits.target[test])
    print(f"{len(train)} train / {len(test)} test images written to {out}")


if __name__ == "__main__":
    main()
