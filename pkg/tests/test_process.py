"""Selection distributions and the thinning/replacement chain driver."""

import numpy as np
import pytest

from helpers import all_spaces, random_points
from vorsim.errors import ConfigError, SelectionOutOfDomain
from vorsim.process import (InitSpec, ProcessParams, SelectionSpec,
                            initial_configuration, minorization_bound, run,
                            selection_probabilities, step)
from vorsim.space import Space
from vorsim.tessellation import build

THREE_ON_CIRCLE = [0.0, 0.1, 0.5]  # cell volumes 0.30, 0.25, 0.45


def _probs(points, space, sel):
    return selection_probabilities(build(points, space), sel)


def test_volume_power_frozen_probabilities(circle):
    sel = SelectionSpec("volume_power", alpha=1.0)
    assert _probs(THREE_ON_CIRCLE, circle, sel) == \
        pytest.approx([0.30, 0.25, 0.45], abs=1e-12)
    sel = SelectionSpec("volume_power", alpha=-1.0)
    assert _probs(THREE_ON_CIRCLE, circle, sel) == \
        pytest.approx([15 / 43, 18 / 43, 10 / 43], abs=1e-12)
    sel = SelectionSpec("volume_power", alpha=0.0)
    assert _probs(THREE_ON_CIRCLE, circle, sel) == \
        pytest.approx([1 / 3] * 3, abs=1e-15)


def test_probabilities_normalize_everywhere():
    rng = np.random.default_rng(31)
    for space in all_spaces():
        for alpha in (-1.5, 0.0, 0.7, 2.0):
            sel = SelectionSpec("volume_power", alpha=alpha)
            p = _probs(random_points(rng, space, 12), space, sel)
            assert abs(float(np.sum(p)) - 1.0) <= 1e-12
            assert np.all(p >= 0.0)


def test_probabilities_follow_point_permutation(circle):
    sel = SelectionSpec("volume_power", alpha=1.4)
    base = _probs(THREE_ON_CIRCLE, circle, sel)
    perm = _probs([0.1, 0.5, 0.0], circle, sel)
    assert perm == pytest.approx([base[1], base[2], base[0]], abs=1e-13)


def test_probabilities_invariant_under_density_scaling():
    # multiplying the reference density by a constant rescales every cell
    # volume by the same factor, which cancels in the normalization
    pts1 = THREE_ON_CIRCLE
    rng = np.random.default_rng(32)
    pts2 = random_points(rng, Space("torus", 1.0), 9)
    for alpha in (-1.3, 0.7, 2.0):
        sel = SelectionSpec("volume_power", alpha=alpha)
        a = _probs(pts1, Space("circle", 1.0, density=[1.0, 1.0]), sel)
        b = _probs(pts1, Space("circle", 1.0, density=[3.0, 3.0]), sel)
        assert a == pytest.approx(b, abs=1e-12)
        a = _probs(pts2, Space("torus", 1.0, density=[[1.0]]), sel)
        b = _probs(pts2, Space("torus", 1.0, density=[[7.5]]), sel)
        assert a == pytest.approx(b, abs=1e-12)


def test_volume_table_frozen_probabilities(circle):
    sel = SelectionSpec("volume_table", breakpoints=[0.0, 0.35, 1.0],
                        values=[2.0, 1.0])
    assert _probs(THREE_ON_CIRCLE, circle, sel) == \
        pytest.approx([0.4, 0.4, 0.2], abs=1e-14)


def test_volume_table_domain_violation_names_the_volume(circle):
    sel = SelectionSpec("volume_table", breakpoints=[0.0, 0.35],
                        values=[1.0])
    with pytest.raises(SelectionOutOfDomain) as err:
        _probs(THREE_ON_CIRCLE, circle, sel)
    msg = str(err.value)
    assert "0.449" in msg and "0.35" in msg  # offending volume and table edge


def test_neighbor_table_rates_indexed_by_neighbor_count(interval):
    # interval chain 0.2, 0.5, 0.8 has neighbor counts 1, 2, 1, and a
    # table entry values[k] is the rate for cells with k+1 neighbors
    sel = SelectionSpec("neighbor_table", values=[4.0, 2.0])
    assert _probs([0.2, 0.5, 0.8], interval, sel) == \
        pytest.approx([0.4, 0.2, 0.4], abs=1e-15)
    short = SelectionSpec("neighbor_table", values=[1.0])
    with pytest.raises(SelectionOutOfDomain) as err:
        _probs([0.2, 0.5, 0.8], interval, short)
    assert "2" in str(err.value)


def test_selection_spec_validation():
    with pytest.raises(ConfigError):
        SelectionSpec("nearest_fit")
    with pytest.raises(ConfigError):
        SelectionSpec("volume_power")
    with pytest.raises(ConfigError):
        SelectionSpec("volume_table", breakpoints=[0.0, 1.0], values=[-1.0])
    with pytest.raises(ConfigError):
        SelectionSpec("volume_table", breakpoints=[0.5, 0.5], values=[1.0])
    with pytest.raises(ConfigError):
        SelectionSpec("neighbor_table", values=[])


def test_minorization_bound_frozen_value():
    sel = SelectionSpec("neighbor_table", values=[3.0, 1.0, 2.0])
    assert minorization_bound(sel, 5) == pytest.approx(1.0 / 15.0, abs=1e-15)
    with pytest.raises(ConfigError):
        minorization_bound(SelectionSpec("volume_power", alpha=1.0), 5)


def test_step_replacement_swaps_one_point(circle):
    t = build(THREE_ON_CIRCLE, circle)
    ev = step(t, SelectionSpec("volume_power", alpha=1.0), "replacement",
              np.random.default_rng(1), step_index=5)
    assert ev.step == 5
    assert 0 <= ev.chosen_j < 3
    assert ev.removed in THREE_ON_CIRCLE
    assert t.n == 3
    assert ev.inserted in list(t.points)


def test_step_thinning_removes_one_point(circle):
    t = build(THREE_ON_CIRCLE, circle)
    ev = step(t, SelectionSpec("volume_power", alpha=1.0), "thinning",
              np.random.default_rng(1))
    assert ev.inserted is None
    assert t.n == 2
    assert ev.removed not in list(t.points)


def test_run_snapshot_grid_and_shapes(circle):
    params = ProcessParams(N=8, T=20, mode="replacement",
                           selection=SelectionSpec("volume_power", alpha=1.0),
                           space=circle, init="iid_mu", seed=3,
                           snapshot_every=8)
    tr = run(params)
    assert list(tr.steps) == list(range(20))
    assert [s.step for s in tr.snapshots] == [0, 8, 16, 20]
    assert len(tr.final_points) == 8
    assert tr.removed.shape == (20, 1)
    assert tr.inserted.shape == (20, 1)
    assert tr.chosen.shape == (20,)
    assert tr.stopped_at is None
    for s in tr.snapshots:
        assert sum(s.volumes) == pytest.approx(1.0, rel=1e-9)


def test_run_thinning_exhausts_to_one_point(circle):
    params = ProcessParams(N=8, T=20, mode="thinning",
                           selection=SelectionSpec("volume_power", alpha=1.0),
                           space=circle, init="iid_mu", seed=3,
                           snapshot_every=8)
    tr = run(params)
    assert len(tr.steps) == 7
    assert len(tr.final_points) == 1
    assert tr.inserted is None


def test_run_is_deterministic(torus):
    params = ProcessParams(N=16, T=64, mode="replacement",
                           selection=SelectionSpec("volume_power", alpha=0.5),
                           space=torus, init="grid_jittered", seed=9,
                           snapshot_every=16)
    a, b = run(params), run(params)
    assert np.array_equal(a.removed, b.removed)
    assert np.array_equal(a.inserted, b.inserted)
    assert np.array_equal(a.chosen, b.chosen)
    assert np.array_equal(a.final_points, b.final_points)


def test_different_seeds_differ(torus):
    base = dict(N=16, T=64, mode="replacement",
                selection=SelectionSpec("volume_power", alpha=0.5),
                space=torus, init="iid_mu", snapshot_every=16)
    a = run(ProcessParams(seed=1, **base))
    b = run(ProcessParams(seed=2, **base))
    assert not np.array_equal(a.removed, b.removed)


def test_initial_configuration_kinds(circle, square):
    rng = np.random.default_rng(0)
    cl = initial_configuration(circle, 6,
                               InitSpec("single_cluster", center=0.5,
                                        radius=0.05), rng)
    assert len(set(cl)) == 6
    assert all(abs(x - 0.5) <= 0.05 for x in cl)
    gr = initial_configuration(circle, 6, "grid_jittered", rng)
    assert len(set(gr)) == 6
    assert max(gr) - min(gr) > 0.5  # spread over the space
    sq = initial_configuration(square, 5, "single_cluster", rng)
    assert len(set(sq)) == 5
    with pytest.raises(ConfigError):
        initial_configuration(circle, 3, [0.0, 0.1, 0.5], rng)
    with pytest.raises(ConfigError):
        initial_configuration(circle, 3, "ring", rng)


def test_initial_configuration_respects_mu_zeros():
    sp = Space("interval", 1.0, mu_density=[0.0, 1.0])
    rng = np.random.default_rng(4)
    pts = initial_configuration(sp, 12, "iid_mu", rng)
    assert all(x >= 0.5 for x in pts)


def test_observers_and_early_stop(circle):
    params = ProcessParams(N=8, T=50, mode="replacement",
                           selection=SelectionSpec("volume_power", alpha=1.0),
                           space=circle, init="iid_mu", seed=5,
                           snapshot_every=10)
    seen = []
    tr = run(params, observers=(lambda t, ev, tess: seen.append(ev.step),))
    assert seen == list(tr.steps)

    # early stopping is evaluated on the snapshot grid
    tr = run(params, stop_when=lambda t, tess: t >= 12)
    assert tr.stopped_at == 20
    assert len(tr.steps) == 20
    assert [s.step for s in tr.snapshots] == [0, 10, 20]


def test_empirical_selection_frequencies_match_probabilities(circle):
    sel = SelectionSpec("volume_power", alpha=1.0)
    want = np.array([0.30, 0.25, 0.45])
    rng = np.random.default_rng(6)
    counts = np.zeros(3)
    trials = 20_000
    for _ in range(trials):
        t = build(THREE_ON_CIRCLE, circle)
        ev = step(t, sel, "thinning", rng)
        counts[ev.chosen_j] += 1
    freq = counts / trials
    sigma = np.sqrt(want * (1 - want) / trials)
    assert np.all(np.abs(freq - want) < 4.0 * sigma)
