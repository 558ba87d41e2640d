"""Thinning and thinning-replacement chains driven by cell statistics.

Each step selects a point with probability proportional to a positive
selection function S of its cell: S of the cell volume for v-processes, S
of the neighbour count for n-processes.  The selected point is removed
and, in replacement mode, a fresh draw from the sampling measure mu takes
its place; in thinning mode the configuration simply shrinks.

Randomness discipline: the run seed feeds a ``numpy`` ``SeedSequence``
that is split into one stream for the initial configuration and one for
the chain, so runs are reproducible and sweeps can re-seed per cell.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DuplicatePoints, SelectionOutOfDomain
from .tessellation import Tessellation

_VOLUME_FLOOR = 1e-300   # guards pow underflow for extreme alpha
_MAX_REDRAWS = 64

INIT_KINDS = ("iid_mu", "grid_jittered", "single_cluster")
MODES = ("replacement", "thinning")


class SelectionSpec:
    """A positive selection function over cells.

    Parameters
    ----------
    kind : str
        ``volume_power``: S(v) = v**alpha of the cell volume.
        ``volume_table``: piecewise-constant positive values over volume
        intervals ``[breakpoints[i], breakpoints[i+1])``; volumes outside
        the table's range are a domain error.
        ``neighbor_table``: positive values indexed by neighbour count
        ``1..len(values)``; degrees outside that range are a domain error.
    alpha : float, optional
        Exponent for ``volume_power``.
    breakpoints, values : array_like, optional
        Table description for the table kinds.
    """

    def __init__(self, kind, alpha=None, breakpoints=None, values=None):
        if kind not in ("volume_power", "volume_table", "neighbor_table"):
            raise ConfigError(f"unknown selection kind {kind!r}")
        self.kind = kind
        self.alpha = None
        self.breakpoints = None
        self.values = None
        if kind == "volume_power":
            if alpha is None or not math.isfinite(float(alpha)):
                raise ConfigError("volume_power needs a finite alpha")
            self.alpha = float(alpha)
        elif kind == "volume_table":
            if breakpoints is None or values is None:
                raise ConfigError("volume_table needs breakpoints and values")
            bp = np.asarray(breakpoints, dtype=float)
            va = np.asarray(values, dtype=float)
            if bp.ndim != 1 or len(bp) < 2 or np.any(np.diff(bp) <= 0):
                raise ConfigError("volume_table breakpoints must be strictly "
                                  "increasing with at least two entries")
            if len(va) != len(bp) - 1:
                raise ConfigError("volume_table needs one value per interval")
            if not np.all(np.isfinite(va)) or np.any(va <= 0):
                raise ConfigError("volume_table values must be positive")
            self.breakpoints = bp
            self.values = va
        else:
            if values is None:
                raise ConfigError("neighbor_table needs values")
            va = np.asarray(values, dtype=float)
            if va.ndim != 1 or len(va) == 0:
                raise ConfigError("neighbor_table needs a non-empty value list")
            if not np.all(np.isfinite(va)) or np.any(va <= 0):
                raise ConfigError("neighbor_table values must be positive")
            self.values = va

    @property
    def uses_volumes(self):
        return self.kind != "neighbor_table"

    def evaluate(self, stats):
        """Selection weights for a vector of cell volumes or degrees."""
        if self.kind == "volume_power":
            v = np.maximum(np.asarray(stats, dtype=float), _VOLUME_FLOOR)
            if self.alpha == 0.0:
                return np.ones_like(v)
            return v ** self.alpha
        if self.kind == "volume_table":
            v = np.asarray(stats, dtype=float)
            idx = np.searchsorted(self.breakpoints, v, side="right") - 1
            bad = (idx < 0) | (idx >= len(self.values))
            if np.any(bad):
                j = int(np.argmax(bad))
                raise SelectionOutOfDomain(
                    f"cell volume {float(v[j])!r} outside the table range "
                    f"[{float(self.breakpoints[0])!r}, "
                    f"{float(self.breakpoints[-1])!r})")
            return self.values[idx]
        d = np.asarray(stats, dtype=np.int64)
        if d.size and (int(d.min()) < 1 or int(d.max()) > len(self.values)):
            bad = (d < 1) | (d > len(self.values))
            j = int(np.argmax(bad))
            raise SelectionOutOfDomain(
                f"neighbour count {int(d[j])} outside the table range "
                f"1..{len(self.values)}")
        return self.values[d - 1]

    def weights(self, tess):
        """Selection weights of every cell of a tessellation."""
        if self.uses_volumes:
            return self.evaluate(tess.cell_volumes())
        return self.evaluate(tess.degrees())


def selection_probabilities(tess, sel):
    """Probability of each point being selected for removal."""
    w = sel.weights(tess)
    tot = float(w.sum())
    if not (tot > 0.0) or not math.isfinite(tot):
        raise SelectionOutOfDomain(
            "selection weights sum to a non-positive or non-finite value")
    return w / tot


def minorization_bound(sel, N):
    """Uniform lower bound min S / (N max S) on n-process selection
    probabilities, valid for every state with N points."""
    if sel.kind != "neighbor_table":
        raise ConfigError("minorization bound applies to neighbor tables")
    vals = sel.values
    return float(vals.min()) / (int(N) * float(vals.max()))


@dataclass(frozen=True)
class InitSpec:
    """How to draw the initial configuration."""
    kind: str
    center: object = None
    radius: object = None

    @staticmethod
    def parse(spec):
        if isinstance(spec, InitSpec):
            init = spec
        elif isinstance(spec, str):
            init = InitSpec(spec)
        elif isinstance(spec, dict):
            extra = set(spec) - {"kind", "center", "radius"}
            if extra:
                raise ConfigError(f"unknown init key {sorted(extra)[0]!r}")
            init = InitSpec(spec.get("kind"), spec.get("center"),
                            spec.get("radius"))
        else:
            raise ConfigError(f"cannot parse init spec {spec!r}")
        if init.kind not in INIT_KINDS:
            raise ConfigError(f"unknown init kind {init.kind!r}")
        return init


@dataclass
class ProcessParams:
    """Everything a chain run depends on."""
    N: int
    T: int
    mode: str
    selection: SelectionSpec
    space: object
    init: object = "iid_mu"
    seed: int = 0
    snapshot_every: int = 1024

    def __post_init__(self):
        self.N = int(self.N)
        self.T = int(self.T)
        self.seed = int(self.seed)
        self.snapshot_every = int(self.snapshot_every)
        if self.N < 2:
            raise ConfigError("N must be at least 2")
        if self.T < 1:
            raise ConfigError("T must be at least 1")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be at least 1")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not isinstance(self.selection, SelectionSpec):
            raise ConfigError("selection must be a SelectionSpec")
        self.init = InitSpec.parse(self.init)


@dataclass(frozen=True)
class StepEvent:
    step: int
    chosen_j: int
    removed: object
    inserted: object = None


@dataclass(frozen=True)
class Snapshot:
    step: int
    points: np.ndarray
    volumes: np.ndarray
    degrees: np.ndarray


@dataclass
class Trajectory:
    params: ProcessParams
    steps: np.ndarray
    chosen: np.ndarray
    removed: np.ndarray
    inserted: object          # ndarray in replacement mode, None in thinning
    snapshots: list
    final_points: np.ndarray
    stopped_at: object = None  # step of an early stop, if any

    @property
    def n_events(self):
        return len(self.steps)


def _choose(w, rng):
    """Inverse-CDF draw over unnormalized positive weights."""
    c = np.cumsum(w)
    tot = float(c[-1])
    if not (tot > 0.0) or not math.isfinite(tot):
        raise SelectionOutOfDomain(
            "selection weights sum to a non-positive or non-finite value")
    j = int(np.searchsorted(c, rng.random() * tot, side="right"))
    return min(j, len(w) - 1)


def step(tess, sel, mode, rng, step_index=0):
    """One transition: select, remove, and (in replacement mode) re-insert.

    Returns the ``StepEvent``; the tessellation is updated in place.
    """
    w = sel.weights(tess)
    j = _choose(w, rng)
    removed = tess.points[j]
    if mode == "thinning":
        if tess.n < 2:
            raise ConfigError("thinning needs at least two points")
        tess.remove_point(j)
        return StepEvent(step_index, j, removed, None)
    space = tess.space
    for _ in range(_MAX_REDRAWS):
        z = space.sample_mu(rng)
        try:
            tess.replace_point(j, z)
        except DuplicatePoints:
            continue
        return StepEvent(step_index, j, removed, tess.points[j])
    raise ConfigError("could not draw a replacement point distinct from "
                      "the configuration")


def initial_configuration(space, N, init, rng):
    """Draw N distinct points according to an init spec."""
    init = InitSpec.parse(init)
    L = space.size
    pts = []
    seen = set()

    def push(p):
        p = space.canonicalize(p)
        if p in seen:
            return False
        seen.add(p)
        pts.append(p)
        return True

    if init.kind == "iid_mu":
        while len(pts) < N:
            push(space.sample_mu(rng))
        return pts

    if init.kind == "grid_jittered":
        jitter = 1e-9 * L
        if space.dim == 1:
            h = L / N
            k = 0
            while len(pts) < N:
                x = (k % N + 0.5) * h + (2.0 * rng.random() - 1.0) * jitter
                push(x if space.periodic else min(max(x, 0.0), L))
                k += 1
        else:
            g = int(math.ceil(math.sqrt(N)))
            h = L / g
            k = 0
            while len(pts) < N:
                r, c = divmod(k % (g * g), g)
                x = (c + 0.5) * h + (2.0 * rng.random() - 1.0) * jitter
                y = (r + 0.5) * h + (2.0 * rng.random() - 1.0) * jitter
                if not space.periodic:
                    x = min(max(x, 0.0), L)
                    y = min(max(y, 0.0), L)
                push((x, y))
                k += 1
        return pts

    # single cluster
    radius = float(init.radius) if init.radius is not None else 0.05 * L
    if radius <= 0:
        raise ConfigError("cluster radius must be positive")
    if space.dim == 1:
        center = float(init.center) if init.center is not None else 0.5 * L
        while len(pts) < N:
            x = center + (2.0 * rng.random() - 1.0) * radius
            if space.periodic:
                push(x)
            elif 0.0 <= x <= L:
                push(x)
    else:
        if init.center is not None:
            center = (float(init.center[0]), float(init.center[1]))
        else:
            center = (0.5 * L, 0.5 * L)
        while len(pts) < N:
            dx = (2.0 * rng.random() - 1.0) * radius
            dy = (2.0 * rng.random() - 1.0) * radius
            if dx * dx + dy * dy > radius * radius:
                continue
            x, y = center[0] + dx, center[1] + dy
            if space.periodic:
                push((x, y))
            elif 0.0 <= x <= L and 0.0 <= y <= L:
                push((x, y))
    return pts


def run(params, observers=(), stop_when=None):
    """Run a chain for T steps (thinning stops at a single survivor).

    ``observers`` are called as ``observer(t, event, tess)`` after every
    step.  ``stop_when(t, tess)``, if given, is evaluated at snapshot
    steps and ends the run early when it returns true (the snapshot at
    that step is still recorded).  Fully deterministic given the seed.
    """
    root = np.random.SeedSequence(params.seed)
    init_ss, chain_ss = root.spawn(2)
    init_rng = np.random.Generator(np.random.PCG64(init_ss))
    rng = np.random.Generator(np.random.PCG64(chain_ss))

    space = params.space
    pts = initial_configuration(space, params.N, params.init, init_rng)
    tess = Tessellation.build(pts, space)
    sel = params.selection
    mode = params.mode
    dim = space.dim
    T = params.T

    steps = np.zeros(T, dtype=np.int64)
    chosen = np.zeros(T, dtype=np.int64)
    removed = np.zeros((T, dim), dtype=float)
    inserted = np.zeros((T, dim), dtype=float) if mode == "replacement" \
        else None
    snapshots = []

    def snap(t):
        snapshots.append(Snapshot(t, np.asarray(tess.points, dtype=float),
                                  tess.cell_volumes(), tess.degrees()))

    snap(0)
    stopped_at = None
    # the weight vector is maintained incrementally on exactly the values
    # a full reevaluation would produce, so runs draw identically to a
    # sequence of step() calls
    use_vol = sel.uses_volumes
    w = np.asarray(sel.evaluate(
        tess.cell_volumes() if use_vol else tess.degrees()), dtype=float)
    kind = sel.kind
    alpha = sel.alpha
    table = sel.values.tolist() if kind == "neighbor_table" else None
    sample = space.sample_mu
    pts = tess.points
    values_at = tess.volumes_at if use_vol else tess.degrees_at
    thinning = mode == "thinning"
    every = params.snapshot_every
    n_ev = 0
    for t in range(1, T + 1):
        j = _choose(w, rng)
        rm = pts[j]
        if thinning:
            aff = tess.remove_point(j)
            w = np.delete(w, j)
            ins = None
        else:
            for _ in range(_MAX_REDRAWS):
                z = sample(rng)
                try:
                    aff = tess.replace_point(j, z)
                    break
                except DuplicatePoints:
                    continue
            else:
                raise ConfigError("could not draw a replacement point "
                                  "distinct from the configuration")
            ins = pts[j]
        if aff:
            new = values_at(aff)
            if kind == "volume_power":
                w[list(aff)] = np.maximum(np.asarray(new, dtype=float),
                                          _VOLUME_FLOOR) ** alpha
            elif kind == "neighbor_table":
                m = len(table)
                for x in new:
                    if x < 1 or x > m:
                        raise SelectionOutOfDomain(
                            f"neighbour count {x} outside the table "
                            f"range 1..{m}")
                w[list(aff)] = [table[x - 1] for x in new]
            else:
                w[list(aff)] = sel.evaluate(np.asarray(new, dtype=float))
        steps[n_ev] = t - 1
        chosen[n_ev] = j
        if dim == 1:
            removed[n_ev, 0] = rm
            if not thinning:
                inserted[n_ev, 0] = ins
        else:
            removed[n_ev] = rm
            if not thinning:
                inserted[n_ev] = ins
        n_ev += 1
        if observers:
            ev = StepEvent(t - 1, j, rm, ins)
            for obs in observers:
                obs(t, ev, tess)
        done = thinning and tess.n == 1
        if t % every == 0 or t == T or done:
            snap(t)
            if stop_when is not None and stop_when(t, tess):
                stopped_at = t
                break
        if done:
            break
    steps = steps[:n_ev]
    chosen = chosen[:n_ev]
    removed = removed[:n_ev]
    if inserted is not None:
        inserted = inserted[:n_ev]
    return Trajectory(params, steps, chosen, removed, inserted, snapshots,
                      np.asarray(tess.points, dtype=float), stopped_at)
