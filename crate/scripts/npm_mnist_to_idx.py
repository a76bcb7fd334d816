#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the `mnist` npm package to IDX.

Usage: npm_mnist_to_idx.py <package/src/digits> <out_dir>

Pixels in the JSON files are floats in [0, 1] rounded to three decimals;
they are mapped back to bytes with round(v * 255). Examples are written
class-interleaved (0, 1, ..., 9, 0, 1, ...) until each class runs out.
"""
import gzip
import json
import os
import struct
import sys


def main():
    src, out = sys.argv[1], sys.argv[2]
    per_class = []
    for label in range(10):
        with open(os.path.join(src, f"{label}.json")) as f:
            flat = json.load(f)["data"]
        per_class.append([flat[i:i + 784] for i in range(0, len(flat), 784)])

    images, labels = [], []
    cursor = [0] * 10
    while any(cursor[c] < len(per_class[c]) for c in range(10)):
        for c in range(10):
            if cursor[c] < len(per_class[c]):
                images.append(per_class[c][cursor[c]])
                labels.append(c)
                cursor[c] += 1

    n = len(images)
    img = bytearray(struct.pack(">IIII", 0x00000803, n, 28, 28))
    for px in images:
        img.extend(min(255, max(0, round(v * 255))) for v in px)
    lab = bytearray(struct.pack(">II", 0x00000801, n))
    lab.extend(labels)

    os.makedirs(out, exist_ok=True)
    for name, payload in (("digits-images-idx3-ubyte.gz", img), ("digits-labels-idx1-ubyte.gz", lab)):
        with open(os.path.join(out, name), "wb") as f:
            f.write(gzip.compress(bytes(payload), mtime=0))
    print(f"wrote {n} examples to {out}")


if __name__ == "__main__":
    main()
