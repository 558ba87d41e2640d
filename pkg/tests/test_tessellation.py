"""Voronoi partitions: frozen small cases, invariants and the sampling oracle."""

import numpy as np
import pytest

from helpers import all_spaces, neighbor_pairs, random_points
from vorsim.errors import ConfigError, DuplicatePoints
from vorsim.space import Space
from vorsim.tessellation import build, oracle_cell_stats


def test_circle_three_point_frozen_volumes(circle):
    t = build([0.0, 0.1, 0.5], circle)
    assert t.cell_volumes() == pytest.approx([0.30, 0.25, 0.45], abs=1e-12)
    assert neighbor_pairs(t) == {(0, 1), (0, 2), (1, 2)}
    assert list(t.degrees()) == [2, 2, 2]


def test_circle_two_point_frozen_volumes(circle):
    t = build([0.2, 0.7], circle)
    assert t.cell_volumes() == pytest.approx([0.5, 0.5], abs=1e-15)
    assert neighbor_pairs(t) == {(0, 1)}


def test_interval_two_point_frozen_volumes(interval):
    t = build([0.2, 0.6], interval)
    assert t.cell_volumes() == pytest.approx([0.4, 0.6], abs=1e-15)
    assert neighbor_pairs(t) == {(0, 1)}
    assert list(t.degrees()) == [1, 1]


def test_single_point_owns_whole_space(interval, torus):
    t = build([0.3], interval)
    assert t.cell_volumes() == pytest.approx([1.0], abs=1e-15)
    assert t.degree_of(0) == 0
    t = build([(0.3, 0.8)], torus)
    assert t.cell_volumes() == pytest.approx([1.0], abs=1e-12)
    assert t.degree_of(0) == 0


def test_square_two_points_split_by_bisector(square):
    t = build([(0.25, 0.5), (0.75, 0.5)], square)
    assert t.cell_volumes() == pytest.approx([0.5, 0.5], abs=1e-12)
    assert neighbor_pairs(t) == {(0, 1)}


def test_torus_two_points(torus):
    t = build([(0.1, 0.1), (0.6, 0.1)], torus)
    assert sum(t.cell_volumes()) == pytest.approx(1.0, abs=1e-12)
    assert neighbor_pairs(t) == {(0, 1)}


def test_torus_partition_and_euler_identity(torus):
    rng = np.random.default_rng(5)
    base = np.linspace(0.125, 0.875, 4)
    pts = [(float(x + rng.normal(0, 0.01)) % 1.0,
            float(y + rng.normal(0, 0.01)) % 1.0)
           for x in base for y in base]
    t = build(pts, torus)
    assert sum(t.cell_volumes()) == pytest.approx(1.0, abs=1e-12)
    # on the torus every Delaunay triangulation satisfies sum(deg) = 6n
    assert int(sum(t.degrees())) == 6 * len(pts)


def test_bounded_partition_of_unity(square):
    rng = np.random.default_rng(6)
    t = build(random_points(rng, square, 40), square)
    assert sum(t.cell_volumes()) == pytest.approx(1.0, abs=1e-10)
    degs = t.degrees()
    assert all(d >= 1 for d in degs)


def test_adjacency_is_symmetric_everywhere():
    rng = np.random.default_rng(7)
    for space in all_spaces():
        t = build(random_points(rng, space, 24), space)
        nbrs = t.neighbor_sets()
        for i, ns in enumerate(nbrs):
            assert i not in ns
            for j in ns:
                assert i in nbrs[j]


def test_duplicate_points_rejected(circle, square):
    with pytest.raises(DuplicatePoints):
        build([0.1, 0.1], circle)
    # 1.0 wraps onto 0.0 on the circle
    with pytest.raises(DuplicatePoints):
        build([0.0, 1.0], circle)
    with pytest.raises(DuplicatePoints):
        build([(0.2, 0.2), (0.2, 0.2)], square)


def test_empty_configuration_rejected(circle):
    with pytest.raises(ConfigError):
        build([], circle)


def test_density_weighted_volumes_frozen():
    sp = Space("interval", 1.0, density=[2.0, 1.0])
    t = build([0.25, 0.75], sp)
    assert t.cell_volumes() == pytest.approx([1.0, 0.5], abs=1e-12)


def test_density_weighted_volumes_partition_2d():
    sp = Space("torus", 1.0, density=[[1.0, 3.0], [2.0, 4.0]])
    rng = np.random.default_rng(8)
    t = build(random_points(rng, sp, 6), sp)
    assert sum(t.cell_volumes()) == pytest.approx(2.5, rel=1e-9)


def test_snapshot_lines_header_and_determinism(torus):
    rng = np.random.default_rng(9)
    pts = random_points(rng, torus, 12)
    lines_a = build(pts, torus).snapshot_lines()
    lines_b = build(pts, torus).snapshot_lines()
    assert lines_a == lines_b
    assert lines_a[0] == "index,x,y,cell_volume,degree,neighbor_list"
    assert len(lines_a) == 13


def test_volume_and_degree_accessors_match_batch(square):
    rng = np.random.default_rng(10)
    t = build(random_points(rng, square, 15), square)
    vols = t.cell_volumes()
    degs = t.degrees()
    for i in range(t.n):
        assert t.volume_of(i) == vols[i]
        assert t.degree_of(i) == degs[i]


def test_oracle_exact_lattice_volumes(torus):
    pts = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]
    vols, nbrs, counts = oracle_cell_stats(pts, torus, resolution=90_000)
    assert vols == pytest.approx([0.25] * 4, abs=1e-9)
    for pair in ((0, 1), (0, 2), (1, 3), (2, 3)):
        assert counts.get(pair, 0) > 2
        assert pair[1] in nbrs[pair[0]]


def test_oracle_agrees_with_engine_on_random_configurations():
    rng = np.random.default_rng(11)
    for space in all_spaces():
        for n in (5, 9):
            pts = random_points(rng, space, n)
            t = build(pts, space)
            vols, _, counts = oracle_cell_stats(pts, space,
                                                resolution=160_000)
            got = t.cell_volumes()
            total = space.total_measure()
            assert np.max(np.abs(np.asarray(got) - vols)) < 6e-3 * total
            pairs = neighbor_pairs(t)
            strong = {p for p, c in counts.items() if c > 2}
            assert strong <= pairs


def test_replace_point_keeps_partition(circle, torus):
    rng = np.random.default_rng(12)
    for space in (circle, torus):
        t = build(random_points(rng, space, 10), space)
        for _ in range(20):
            j = int(rng.integers(t.n))
            p = random_points(rng, space, 1)[0]
            try:
                t.replace_point(j, p)
            except DuplicatePoints:
                continue
            assert sum(t.cell_volumes()) == \
                pytest.approx(space.total_measure(), rel=1e-9)


def test_remove_point_matches_rebuild_of_survivors(interval, square):
    rng = np.random.default_rng(13)
    for space in (interval, square):
        t = build(random_points(rng, space, 9), space)
        t.remove_point(3)
        fresh = build(list(t.points), space)
        assert t.cell_volumes() == pytest.approx(fresh.cell_volumes(),
                                                 rel=1e-9)
        assert neighbor_pairs(t) == neighbor_pairs(fresh)
