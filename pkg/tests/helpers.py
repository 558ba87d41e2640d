"""Shared construction helpers for the test suite."""

import numpy as np

from vorsim.space import Space

ALL_KINDS = ("circle", "interval", "square", "torus")


def random_points(rng, space, n):
    """Draw ``n`` distinct canonical points of ``space`` as a list."""
    L = space.size
    while True:
        if space.dim == 1:
            pts = [float(x) for x in rng.random(n) * L]
        else:
            pts = [(float(x), float(y)) for x, y in rng.random((n, 2)) * L]
        if len(set(pts)) == n:
            return pts


def all_spaces(size=1.0):
    """One plain (uniform-density) space per supported kind."""
    return [Space(k, size) for k in ALL_KINDS]


def neighbor_pairs(tess):
    """Adjacency of a tessellation as a set of index pairs (i < j)."""
    out = set()
    for i, nbrs in enumerate(tess.neighbor_sets()):
        for j in nbrs:
            out.add((i, j) if i < j else (j, i))
    return out
