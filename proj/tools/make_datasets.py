#!/usr/bin/env python3
"""Export the bundled desk-scale datasets into data/.

Writes blobs (synthetic Gaussian clusters), iris, and wine as CSV plus a
schema JSON each. Regenerating is deterministic; the CSVs are committed so
the C++ build needs no Python.
"""

import json
import pathlib

import numpy as np
from sklearn.datasets import load_iris, load_wine

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def fmt(value):
    return np.format_float_positional(value, trim="-")


def write_schema(path, dataset_id, label):
    with open(path, "w") as fh:
        json.dump({"id": dataset_id, "label": label}, fh, indent=2)
        fh.write("\n")


def export_blobs():
    rng = np.random.default_rng(20240817)
    centers = np.array(
        [
            [0.0, 0.0, 1.0, -1.0],
            [2.5, 1.5, -1.0, 0.5],
            [-2.0, 2.5, 0.0, 1.5],
        ]
    )
    per_class = 80
    features, labels = [], []
    for cls, center in enumerate(centers):
        pts = center + rng.normal(scale=1.1, size=(per_class, 4))
        features.append(pts)
        labels.extend([cls] * per_class)
    X = np.vstack(features)
    order = rng.permutation(len(labels))
    X = X[order]
    y = np.array(labels)[order]

    header = ["f1", "f2", "f3", "f4", "y"]
    rows = [[fmt(v) for v in X[i]] + [f"c{y[i]}"] for i in range(len(y))]
    write_csv(OUT / "blobs.csv", header, rows)
    write_schema(OUT / "blobs.schema.json", "blobs", "y")


def export_sklearn(bunch, dataset_id, rename):
    X, y = bunch.data, bunch.target
    names = [rename(n) for n in bunch.feature_names]
    header = names + ["y"]
    rows = [
        [fmt(v) for v in X[i]] + [str(bunch.target_names[y[i]])] for i in range(len(y))
    ]
    write_csv(OUT / f"{dataset_id}.csv", header, rows)
    write_schema(OUT / f"{dataset_id}.schema.json", dataset_id, "y")


def main():
    OUT.mkdir(exist_ok=True)
    export_blobs()
    clean = lambda n: n.replace(" (cm)", "").replace(" ", "_").replace("/", "_")
    export_sklearn(load_iris(), "iris", clean)
    export_sklearn(load_wine(), "wine", clean)
    for name in ("blobs", "iris", "wine"):
        print(f"wrote data/{name}.csv and data/{name}.schema.json")


if __name__ == "__main__":
    main()
