"""Exhaustive counting used as an oracle for the local densities."""

from fractions import Fraction

import numpy as np


def brute_probability(model, const, K1, K2, parity=None) -> Fraction:
    """Measure of y mod ell^K with both congruence coordinates vanishing, by listing every y."""
    ell = model.ell
    n = ell ** max(K1, K2, 1)
    g = np.arange(n, dtype=np.int64)
    Y = np.stack(np.meshgrid(g, g, g, g, indexing="ij"), -1).reshape(-1, 4)
    ok = np.ones(len(Y), dtype=bool)
    if parity is not None:
        ok &= Y.sum(axis=1) % 2 == parity
    for i, K in enumerate((K1, K2)):
        m = ell ** K
        lin, quad = model.polys[i]
        v = np.full(len(Y), const[i] % m, dtype=np.int64)
        for j in range(4):
            v = (v + (lin[j] % m) * Y[:, j]) % m
        for (a, b), c in quad.items():
            v = (v + (c % m) * Y[:, a] % m * Y[:, b]) % m
        ok &= v == 0
    return Fraction(int(ok.sum()), len(Y))
