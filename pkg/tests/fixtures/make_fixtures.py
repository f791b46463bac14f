"""Regenerate the synthetic fixtures (run from this directory).

The CSV files are checked in; this script documents how they were made.
"""

import json

import numpy as np
from sklearn.datasets import make_blobs, make_moons


def write(name, X, y):
    np.savetxt(f"{name}.csv", X, delimiter=",", fmt="%.17g")
    np.savetxt(f"{name}_labels.csv", y.reshape(-1, 1), fmt="%d")


def main():
    X, y = make_blobs(n_samples=60, centers=[[-3.0, 0.0], [3.0, 0.0]], cluster_std=1.0, random_state=0)
    write("blobs60", X, y)
    X, y = make_moons(n_samples=80, noise=0.1, random_state=0)
    write("moons80", X, y)
    X, y = make_blobs(n_samples=40, centers=[[0.0, 0.0], [4.0, 1.0]], cluster_std=0.8, random_state=1)
    write("golden40", X, y)
    config = {
        "data": "golden40.csv",
        "labels": "golden40_labels.csv",
        "seed": 7,
        "ille": {"T": 2, "max_iter": 300},
        "eval": {"n_init": 5, "n_splits": 3},
    }
    with open("golden40_config.json", "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    main()
