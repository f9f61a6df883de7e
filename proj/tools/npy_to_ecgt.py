#!/usr/bin/env python3
"""Convert pre-extracted 100 Hz 12-lead recordings to ECGT train/test files.

Input:
  --signals  .npy array, [S, 1000, 12] or [S, 12, 1000], any float dtype
  --labels   text file, one line per record with its diagnostic superclasses
             separated by commas (e.g. "MI,STTC"); only the first is kept.
             Records with an empty line are dropped.

Output: <out>_train.ecgt and <out>_test.ecgt, split 90/10 after a seeded shuffle.
"""

import argparse
import struct
import sys

import numpy as np

CLASSES = ["NORM", "CD", "MI", "HYP", "STTC"]


def write_ecgt(path, signals, labels):
    with open(path, "wb") as f:
        f.write(b"ECGT")
        f.write(struct.pack("<HQII", 1, len(labels), 12, 1000))
        f.write(np.ascontiguousarray(signals, dtype="<f4").tobytes())
        f.write(np.asarray(labels, dtype=np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--signals", required=True)
    ap.add_argument("--labels", required=True)
    ap.add_argument("--out", required=True, help="output prefix")
    ap.add_argument("--train-fraction", type=float, default=0.9)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    x = np.load(args.signals)
    if x.ndim != 3:
        sys.exit(f"signals must be 3-D, got shape {x.shape}")
    if x.shape[1:] == (1000, 12):
        x = x.transpose(0, 2, 1)
    if x.shape[1:] != (12, 1000):
        sys.exit(f"expected [S,1000,12] or [S,12,1000], got {x.shape}")

    with open(args.labels) as f:
        lines = [line.strip() for line in f]
    if len(lines) != len(x):
        sys.exit(f"{len(lines)} label lines for {len(x)} records")

    keep, labels = [], []
    for i, line in enumerate(lines):
        if not line:
            continue
        first = line.split(",")[0].strip()
        if first not in CLASSES:
            sys.exit(f"line {i + 1}: unknown class {first!r}")
        keep.append(i)
        labels.append(CLASSES.index(first))
    x = x[keep]
    labels = np.array(labels)

    order = np.random.default_rng(args.seed).permutation(len(labels))
    cut = int(round(args.train_fraction * len(order)))
    train, test = order[:cut], order[cut:]
    write_ecgt(args.out + "_train.ecgt", x[train], labels[train])
    write_ecgt(args.out + "_test.ecgt", x[test], labels[test])
    print(f"train {len(train)}, test {len(test)}, dropped {len(lines) - len(keep)}")


if __name__ == "__main__":
    main()
