#!/usr/bin/env python3
# Copyright 2026 The truthcheck Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates data/banknote.csv: a synthetic banknote-style dataset.

Four continuous wavelet-style features (variance, skew, curtosis, entropy)
and a binary label (1 = forged), 762 genuine + 610 forged rows. Values are
drawn from class-conditional correlated Gaussians whose moments loosely
follow the public banknote authentication data. Deterministic for a fixed
seed.
"""
import argparse

import numpy as np

GENUINE = dict(mean=[2.28, 4.26, 0.80, -1.15],
               std=[1.41, 3.60, 2.27, 1.49])
FORGED = dict(mean=[-1.87, -0.99, 2.15, -1.25],
              std=[1.32, 3.78, 3.68, 1.45])
# Shared within-class correlation (variance, skew, curtosis, entropy).
CORR = np.array([
    [1.00, 0.25, -0.40, 0.30],
    [0.25, 1.00, -0.85, -0.50],
    [-0.40, -0.85, 1.00, 0.30],
    [0.30, -0.50, 0.30, 1.00],
])


def draw(rng, spec, n):
    std = np.array(spec["std"])
    cov = CORR * np.outer(std, std)
    return rng.multivariate_normal(spec["mean"], cov, size=n)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=1372)
    parser.add_argument("--out", default="data/banknote.csv")
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    x = np.vstack([draw(rng, GENUINE, 762), draw(rng, FORGED, 610)])
    y = np.concatenate([np.zeros(762, dtype=int), np.ones(610, dtype=int)])
    order = rng.permutation(len(y))
    x, y = x[order], y[order]
    with open(args.out, "w") as f:
        f.write("variance,skew,curtosis,entropy,class\n")
        for row, label in zip(x, y):
            f.write(",".join(f"{v:.5f}" for v in row) + f",{label}\n")


if __name__ == "__main__":
    main()
