#!/usr/bin/env python3
"""Regenerate the bundled multiclass toy datasets in data/.

Each file is a labeled classification table (numeric feature columns, final
integer label column) sized so that an epsilon-greedy bandit conversion with a
20% logging split leaves the point-estimate learners exposed to importance
weights up to num_classes / epsilon.  Fixed seeds make the files byte-stable.
"""

import math
import os
import random
import sys


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            feats = ",".join("%.6f" % v for v in row[:-1])
            f.write(feats + "," + str(row[-1]) + "\n")


def blobs3(rng):
    """Three well-separated Gaussian blobs; every learner should do well."""
    rows = []
    for label in range(3):
        theta = math.pi / 2 + label * 2 * math.pi / 3
        cx, cy = 2.0 * math.cos(theta), 2.0 * math.sin(theta)
        for _ in range(100):
            rows.append((cx + rng.gauss(0, 0.6), cy + rng.gauss(0, 0.6),
                         label))
    rng.shuffle(rows)
    return ["x1", "x2", "label"], rows


def overlap4(rng):
    """Four heavily overlapping blobs at the corners of a square."""
    centers = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    rows = []
    for label, (cx, cy) in enumerate(centers):
        for _ in range(80):
            rows.append((cx + rng.gauss(0, 0.9), cy + rng.gauss(0, 0.9),
                         label))
    rng.shuffle(rows)
    return ["x1", "x2", "label"], rows


def stripes5(rng):
    """Five ordered bands along one axis with label noise and a noise axis."""
    rows = []
    for _ in range(300):
        x1 = rng.uniform(0, 5)
        label = min(int(x1), 4)
        if rng.random() < 0.1:
            label = rng.randrange(5)
        rows.append((x1, rng.gauss(0, 1.0), label))
    return ["x1", "x2", "label"], rows


def wide8(rng):
    """Eight classes from a noisy random linear map over three features.

    With epsilon = 0.25 the exploration propensity is 1/32, so importance
    weights reach 32 and a small logging split makes point-estimate
    objectives very noisy.
    """
    weights = [[rng.uniform(-2, 2) for _ in range(4)] for _ in range(8)]
    rows = []
    for _ in range(320):
        x = [rng.gauss(0, 1.0) for _ in range(3)]
        scores = [sum(w * v for w, v in zip(wk, x + [1.0])) for wk in weights]
        label = max(range(8), key=lambda k: scores[k])
        if rng.random() < 0.15:
            label = rng.randrange(8)
        rows.append((x[0], x[1], x[2], label))
    return ["x1", "x2", "x3", "label"], rows


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    os.makedirs(out_dir, exist_ok=True)
    specs = [("blobs3", blobs3, 101), ("overlap4", overlap4, 202),
             ("stripes5", stripes5, 303), ("wide8", wide8, 404)]
    for name, fn, seed in specs:
        header, rows = fn(random.Random(seed))
        path = os.path.join(out_dir, name + ".csv")
        write_csv(path, header, rows)
        print("wrote", path, "(%d rows)" % len(rows))


if __name__ == "__main__":
    main()
