"""Reduced-scale self-checks of the numerical kernels.

Each suite prints one ``ok``/``FAIL`` line; the runner returns a nonzero
status if anything failed.  The suites mirror the full test matrix at a
fraction of the cost: oracle agreement on small random configurations,
exact partition-of-unity along a chain, incremental-update consistency,
frozen selection probabilities, the exact minorization inequality, and
byte-level determinism of run outputs.
"""

import numpy as np

from . import tessellation
from .diagnostics import minorization_check
from .errors import ConfigError
from .events import events_lines
from .process import ProcessParams, SelectionSpec, run, \
    selection_probabilities
from .rasters import spacetime_raster
from .space import Space
from .tessellation import oracle_cell_stats


def _check_selection():
    cir = Space("circle", 1.0)
    tess = tessellation.build([0.0, 0.1, 0.5], cir)
    sel = SelectionSpec("volume_power", alpha=1.0)
    p = selection_probabilities(tess, sel)
    assert np.max(np.abs(p - np.array([0.30, 0.25, 0.45]))) < 1e-12
    rng = np.random.default_rng(0)
    for _ in range(20):
        pts = sorted(rng.uniform(0, 1, 8).tolist())
        t = tessellation.build(pts, cir)
        for alpha in (-1.0, 0.0, 0.5, 2.0):
            q = selection_probabilities(
                t, SelectionSpec("volume_power", alpha=alpha))
            assert abs(q.sum() - 1.0) < 1e-12 and np.all(q > 0)
    # scale invariance of the power selection under density scaling
    dens = Space("circle", 1.0, density=[3.0, 3.0, 3.0, 3.0])
    t1 = tessellation.build([0.05, 0.4, 0.7], cir)
    t2 = tessellation.build([0.05, 0.4, 0.7], dens)
    s = SelectionSpec("volume_power", alpha=0.7)
    assert np.max(np.abs(selection_probabilities(t1, s)
                         - selection_probabilities(t2, s))) < 1e-12


def _check_partition():
    tor = Space("torus", 1.0)
    params = ProcessParams(N=50, T=800, mode="replacement",
                           selection=SelectionSpec("volume_power",
                                                   alpha=0.5),
                           space=tor, init="iid_mu", seed=4,
                           snapshot_every=100)
    tr = run(params)
    for snap in tr.snapshots:
        total = float(np.sum(snap.volumes))
        assert abs(total - 1.0) < 1e-9, total
        assert abs(float(np.mean(snap.degrees)) - 6.0) < 1e-9


def _check_oracle():
    rng = np.random.default_rng(7)
    for kind in ("circle", "torus", "square"):
        space = Space(kind, 1.0)
        n = int(rng.integers(3, 9))
        if space.dim == 1:
            pts = sorted(rng.uniform(0, 1, n).tolist())
        else:
            pts = [tuple(p) for p in rng.uniform(0, 1, (n, 2))]
        tess = tessellation.build(pts, space)
        vols, nbrs, counts = oracle_cell_stats(pts, space, resolution=90_000)
        dv = np.max(np.abs(tess.cell_volumes() - vols))
        assert dv < 2e-2, (kind, dv)
        strong = {pair for pair, c in counts.items() if c > 2}
        got = set()
        for i, s in enumerate(tess.neighbor_sets()):
            got |= {(min(i, j), max(i, j)) for j in s}
        assert strong <= got, (kind, strong - got)


def _check_incremental():
    tor = Space("torus", 1.0)
    rng = np.random.default_rng(11)
    pts = [tuple(p) for p in rng.uniform(0, 1, (100, 2))]
    tess = tessellation.build(pts, tor)
    for _ in range(200):
        j = int(rng.integers(0, 100))
        tess.replace_point(j, tuple(rng.uniform(0, 1, 2)))
    fresh = tessellation.build(tess.points, tor)
    dv = np.max(np.abs(tess.cell_volumes() - fresh.cell_volumes()))
    assert dv < 1e-9, dv
    assert tess.neighbor_sets() == fresh.neighbor_sets()


def _check_minorization():
    rng = np.random.default_rng(3)
    for _ in range(50):
        k = int(rng.integers(2, 10))
        table = rng.uniform(0.05, 5.0, k)
        sel = SelectionSpec("neighbor_table", values=table)
        n = int(rng.integers(3, 15))
        states = [rng.integers(1, k + 1, size=n).tolist()
                  for _ in range(20)]
        rep = minorization_check(states, sel, n)
        assert rep.holds


def _check_determinism():
    cir = Space("circle", 1.0)
    params = ProcessParams(N=16, T=300, mode="replacement",
                           selection=SelectionSpec("volume_power",
                                                   alpha=1.5),
                           space=cir, init="iid_mu", seed=9,
                           snapshot_every=64)
    a = events_lines(run(params))
    b = events_lines(run(params))
    assert a == b
    img = spacetime_raster(run(params).snapshots[0].points,
                           run(params).removed, run(params).inserted,
                           1.0, 64)
    assert img.shape == (300, 64)
    sq = Space("square", 1.0)
    p2 = ProcessParams(N=8, T=20, mode="replacement",
                       selection=SelectionSpec("volume_power", alpha=0.0),
                       space=sq, init="iid_mu", seed=1)
    tr2 = run(p2)
    try:
        spacetime_raster(tr2.snapshots[0].points, tr2.removed,
                         tr2.inserted, 1.0, 64)
        raise AssertionError("2D input must be rejected")
    except ConfigError:
        pass


_SUITES = (
    ("selection probabilities", _check_selection),
    ("partition of unity", _check_partition),
    ("oracle agreement", _check_oracle),
    ("incremental updates", _check_incremental),
    ("minorization bound", _check_minorization),
    ("determinism and rasters", _check_determinism),
)


def run_selftest():
    """Run every suite; returns 0 when all pass, 1 otherwise."""
    failures = 0
    for name, fn in _SUITES:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"FAIL: {name}: {exc}")
        else:
            print(f"ok: {name}")
    if failures:
        print(f"selftest: {failures} of {len(_SUITES)} suites failed")
        return 1
    print(f"selftest: all {len(_SUITES)} suites passed")
    return 0
