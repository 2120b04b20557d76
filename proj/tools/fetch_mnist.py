#!/usr/bin/env python3
"""Download MNIST and write it as pfls-bin datasets (60000x784 and 10000x784).

Usage: python3 tools/fetch_mnist.py [OUTPUT_DIR]   (default: tests/data)

Pixels are scaled to [0, 1]. The acceptance binary looks for
mnist_train.pflsb and mnist_test.pflsb in tests/data, or in $PFLS_MNIST_DIR.
"""

import gzip
import pathlib
import struct
import sys
import urllib.request

import numpy as np

MIRRORS = [
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
]
FILES = {
    "train": "train-images-idx3-ubyte.gz",
    "test": "t10k-images-idx3-ubyte.gz",
}


def download(name):
    last = None
    for base in MIRRORS:
        try:
            with urllib.request.urlopen(base + name, timeout=60) as r:
                return r.read()
        except OSError as e:
            last = e
    raise SystemExit(f"could not download {name}: {last}")


def parse_idx_images(blob):
    raw = gzip.decompress(blob)
    magic, n, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != 2051:
        raise SystemExit("unexpected IDX magic")
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=16)
    return pixels.reshape(n, rows * cols).astype("<f8") / 255.0


def write_pfls_bin(path, values):
    n, d = values.shape
    with open(path, "wb") as f:
        f.write(b"PFLS")
        f.write(struct.pack("<IQQ", 1, n, d))
        f.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
    out.mkdir(parents=True, exist_ok=True)
    for split, name in FILES.items():
        images = parse_idx_images(download(name))
        target = out / f"mnist_{split}.pflsb"
        write_pfls_bin(target, images)
        print(f"wrote {target} ({images.shape[0]}x{images.shape[1]})")


if __name__ == "__main__":
    main()
