#!/usr/bin/env python3
#
# Project MolJAE - Copyright 2026 The MolJAE Authors.
# SPDX-License-Identifier: Apache-2.0
#
"""Writes data/toy20.jsonl: 20 small H/C/N/O/F molecules with rough 3D
coordinates from a spring embedding (bond lengths, ideal angles, repulsion).
The geometry is approximate; it only needs to be consistent and chiral-free
enough for desk-scale experiments."""

import json
import sys

import numpy as np

# (name, elements, charges or None, bonds (i, j, order))
MOLECULES = [
    ("water", "OHH", None, [(0, 1, 1), (0, 2, 1)]),
    ("ammonia", "NHHH", None, [(0, 1, 1), (0, 2, 1), (0, 3, 1)]),
    ("methane", "CHHHH", None, [(0, i, 1) for i in range(1, 5)]),
    ("ammonium", "NHHHH", [1, 0, 0, 0, 0], [(0, i, 1) for i in range(1, 5)]),
    ("methanol", "COHHHH", None,
     [(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1), (1, 5, 1)]),
    ("formaldehyde", "COHH", None, [(0, 1, 2), (0, 2, 1), (0, 3, 1)]),
    ("hydrogen_cyanide", "CNH", None, [(0, 1, 3), (0, 2, 1)]),
    ("ethane", "CCHHHHHH", None,
     [(0, 1, 1)] + [(0, i, 1) for i in (2, 3, 4)] + [(1, i, 1) for i in (5, 6, 7)]),
    ("ethylene", "CCHHHH", None,
     [(0, 1, 2), (0, 2, 1), (0, 3, 1), (1, 4, 1), (1, 5, 1)]),
    ("acetylene", "CCHH", None, [(0, 1, 3), (0, 2, 1), (1, 3, 1)]),
    ("fluoromethane", "CFHHH", None, [(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)]),
    ("methylamine", "CNHHHHH", None,
     [(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1), (1, 5, 1), (1, 6, 1)]),
    ("formic_acid", "COOHH", None, [(0, 1, 2), (0, 2, 1), (0, 3, 1), (2, 4, 1)]),
    ("carbon_dioxide", "OCO", None, [(0, 1, 2), (1, 2, 2)]),
    ("acetaldehyde", "CCOHHHH", None,
     [(0, 1, 1), (1, 2, 2), (0, 3, 1), (0, 4, 1), (0, 5, 1), (1, 6, 1)]),
    ("ethanol", "CCOHHHHHH", None,
     [(0, 1, 1), (1, 2, 1), (0, 3, 1), (0, 4, 1), (0, 5, 1), (1, 6, 1),
      (1, 7, 1), (2, 8, 1)]),
    ("acetonitrile", "CCNHHH", None,
     [(0, 1, 1), (1, 2, 3), (0, 3, 1), (0, 4, 1), (0, 5, 1)]),
    ("dimethyl_ether", "COCHHHHHH", None,
     [(0, 1, 1), (1, 2, 1)] + [(0, i, 1) for i in (3, 4, 5)]
     + [(2, i, 1) for i in (6, 7, 8)]),
    ("formamide", "CONHHH", None,
     [(0, 1, 2), (0, 2, 1), (0, 3, 1), (2, 4, 1), (2, 5, 1)]),
    ("benzene", "CCCCCCHHHHHH", None,
     [(i, (i + 1) % 6, 4) for i in range(6)] + [(i, i + 6, 1) for i in range(6)]),
]

COVALENT = {"H": 0.32, "C": 0.76, "N": 0.71, "O": 0.66, "F": 0.57}
ORDER_SHRINK = {1: 0.0, 2: 0.20, 3: 0.32, 4: 0.11}


def bond_length(a, b, order):
    return COVALENT[a] + COVALENT[b] - ORDER_SHRINK[order]


def ideal_angle(orders):
    if any(o == 3 for o in orders) or orders.count(2) >= 2:
        return np.pi
    if any(o in (2, 4) for o in orders):
        return 2.0 * np.pi / 3.0
    return np.deg2rad(109.47)


def embed(elements, bonds, rng, iters=6000, lr=0.02):
    n = len(elements)
    x = rng.normal(scale=1.0, size=(n, 3))
    target = {}
    nbrs = [[] for _ in range(n)]
    for i, j, o in bonds:
        target[(min(i, j), max(i, j))] = bond_length(elements[i], elements[j], o)
        nbrs[i].append((j, o))
        nbrs[j].append((i, o))
    for c in range(n):
        ang = ideal_angle([o for _, o in nbrs[c]])
        for a in range(len(nbrs[c])):
            for b in range(a + 1, len(nbrs[c])):
                i, oi = nbrs[c][a]
                j, oj = nbrs[c][b]
                key = (min(i, j), max(i, j))
                if key in target:
                    continue
                li = bond_length(elements[c], elements[i], oi)
                lj = bond_length(elements[c], elements[j], oj)
                target[key] = np.sqrt(li * li + lj * lj - 2 * li * lj * np.cos(ang))
    for _ in range(iters):
        grad = np.zeros_like(x)
        for i in range(n):
            for j in range(i + 1, n):
                d = x[i] - x[j]
                r = np.linalg.norm(d) + 1e-9
                if (i, j) in target:
                    g = 2.0 * (r - target[(i, j)]) * d / r
                elif r < 2.4:
                    g = -2.0 * (2.4 - r) * d / r * 0.3
                else:
                    continue
                grad[i] += g
                grad[j] -= g
        x -= lr * grad
    return x - x.mean(axis=0)


def main(path):
    rng = np.random.default_rng(20260101)
    with open(path, "w") as out:
        for name, elements, charges, bonds in MOLECULES:
            x = embed(elements, bonds, rng)
            charges = charges or [0] * len(elements)
            rec = {
                "atoms": [
                    {"el": e, "q": q, "xyz": [round(float(v), 4) for v in p]}
                    for e, q, p in zip(elements, charges, x)
                ],
                "bonds": [[i, j, o] for i, j, o in bonds],
            }
            out.write(json.dumps(rec, separators=(",", ":")) + "\n")
            print(name, file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/toy20.jsonl")
