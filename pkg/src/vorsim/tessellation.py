"""Voronoi tessellations with incremental point replacement.

A tessellation is backed by one of three structures: a sorted-order arc
structure in one dimension, an incremental Delaunay engine in two, or a
direct half-plane clipping fallback for configurations the engine cannot
represent (fewer than three torus points, exactly degenerate inputs).  All
backends answer the same questions: cell volumes under the reference
density, neighbour sets over shared positive-length cell boundaries, and
which cells changed after replacing or removing a point.

Cells are addressed by their index in the configuration.  ``replace_point``
keeps indices stable; ``remove_point`` shifts the indices above the removed
one down by one, as list deletion does.
"""

import math

import numpy as np

from .engine1d import Engine1D
from .engine2d import Abort2D, build_engine
from .errors import ConfigError, DuplicatePoints
from .geom2d import (BOUNDARY, clip_polygon_halfplane, halfplane_area,
                     polygon_area, polygon_grid_measure)

# Dual edges shorter than this fraction of the space size are treated as
# degenerate contact (four cells meeting in a point) rather than adjacency.
EDGE_EPS_REL = 1e-12


def _canonical_points(points, space):
    pts = [space.canonicalize(p) for p in points]
    if not pts:
        raise ConfigError("a configuration needs at least one point")
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    for a, b in zip(order, order[1:]):
        if pts[a] == pts[b]:
            raise DuplicatePoints(f"points {a} and {b} coincide")
    return pts


class Tessellation:
    """Voronoi cells of a point configuration on a supported space."""

    @classmethod
    def build(cls, points, space):
        self = cls.__new__(cls)
        self.space = space
        self.points = _canonical_points(points, space)
        self._eps2 = (EDGE_EPS_REL * space.size) ** 2
        self._vol = {}
        self._nbr = {}
        # volumes and neighbour sets age independently: volume-only reads
        # (the common case along a chain) skip the adjacency bookkeeping
        self._dirty_vol = set()
        self._dirty_nbr = set()
        self._install_backend()
        return self

    @property
    def n(self):
        return len(self.points)

    @property
    def backend(self):
        return self._backend

    def _install_backend(self):
        """(Re)build the backing structure from the current points."""
        pts = self.points
        n = len(pts)
        self._eid = list(range(n))
        self._cfg = dict(zip(self._eid, range(n)))
        self._vol.clear()
        self._nbr.clear()
        self._dirty_vol = set(range(n))
        self._dirty_nbr = set(range(n))
        space = self.space
        self._bounded = not space.periodic
        self._collect2 = self._bounded or space.density is not None
        if space.dim == 1:
            self._eng = Engine1D(space.size, space.periodic,
                                 dict(enumerate(pts)))
            self._backend = "sorted1d"
            self._ghosts = frozenset()
            return
        eng = None
        if not (space.periodic and n < 3):
            eng = build_engine(pts, space.size, space.periodic)
        if eng is not None:
            self._eng = eng
            self._backend = "delaunay2d"
            self._ghosts = eng.ghosts
        else:
            self._eng = None
            self._backend = "clip2d"
            self._ghosts = frozenset()

    # ------------------------------------------------------------------
    # mutation

    def _check_duplicate(self, p):
        if self._backend == "sorted1d":
            dup = self._eng.has_exact(p)
        elif self._backend == "delaunay2d":
            dup = self._eng.has_exact(p[0], p[1])
        else:
            dup = p in self.points
        if dup:
            raise DuplicatePoints(f"point {p!r} is already a generator")

    def _cfg_indices(self, eids):
        cfg = self._cfg
        return tuple(sorted(cfg[e] for e in eids))

    def replace_point(self, j, new_point):
        """Move point j; returns the indices whose cells changed."""
        n = len(self.points)
        if not (0 <= j < n):
            raise ConfigError(f"index {j} outside the configuration")
        p = self.space.canonicalize(new_point)
        if p == self.points[j]:
            return (j,)
        self._check_duplicate(p)
        self.points[j] = p
        e = self._eid[j]
        if self._backend == "sorted1d":
            aff = self._eng.delete(e)
            aff |= self._eng.insert(e, p)
            aff.add(e)
            self._dirty_vol |= aff
            self._dirty_nbr |= aff
            return self._cfg_indices(aff)
        if self._backend == "delaunay2d":
            eng = self._eng
            try:
                aff = eng.delete(e)
                eng.X[e] = p[0]
                eng.Y[e] = p[1]
                aff |= eng.insert(e)
            except Abort2D:
                self._install_backend()
                return tuple(range(n))
            aff.add(e)
            aff -= self._ghosts
            self._dirty_vol |= aff
            self._dirty_nbr |= aff
            return self._cfg_indices(aff)
        self._install_backend()
        return tuple(range(n))

    def remove_point(self, j):
        """Delete point j from the configuration (thinning step)."""
        n = len(self.points)
        if not (0 <= j < n):
            raise ConfigError(f"index {j} outside the configuration")
        if n == 1:
            raise ConfigError("cannot remove the last point")
        e = self._eid[j]
        self.points.pop(j)
        self._eid.pop(j)
        self._cfg = dict(zip(self._eid, range(n - 1)))
        self._vol.pop(e, None)
        self._nbr.pop(e, None)
        self._dirty_vol.discard(e)
        self._dirty_nbr.discard(e)
        if self._backend == "sorted1d":
            aff = self._eng.delete(e)
            self._dirty_vol |= aff
            self._dirty_nbr |= aff
            return self._cfg_indices(aff)
        if self._backend == "delaunay2d":
            if self.space.periodic and len(self.points) < 3:
                self._install_backend()
                return tuple(range(n - 1))
            try:
                aff = self._eng.delete(e)
            except Abort2D:
                self._install_backend()
                return tuple(range(n - 1))
            aff.discard(e)
            aff -= self._ghosts
            self._dirty_vol |= aff
            self._dirty_nbr |= aff
            return self._cfg_indices(aff)
        self._install_backend()
        return tuple(range(n - 1))

    # ------------------------------------------------------------------
    # cell statistics

    def _refresh(self, eids=None, need="both"):
        vol_only = need == "vol"
        if vol_only:
            dirty = self._dirty_vol
        else:
            dirty = self._dirty_vol | self._dirty_nbr
        todo = dirty if eids is None else set(eids) & dirty
        if not todo:
            return
        if self._backend == "clip2d":
            self._clip_all()
            self._dirty_vol = set()
            self._dirty_nbr = set()
            return
        if self._backend == "sorted1d":
            for v in list(todo):
                self._cell_1d(v)
            self._dirty_vol -= todo
            self._dirty_nbr -= todo
            return
        if vol_only:
            for v in list(todo):
                if self._cell_2d(v, False):
                    self._dirty_nbr.discard(v)
            self._dirty_vol -= todo
        else:
            for v in list(todo):
                self._cell_2d(v, True)
            self._dirty_vol -= todo
            self._dirty_nbr -= todo

    def _cell_1d(self, v):
        eng = self._eng
        space = self.space
        if len(eng.keys) == 1:
            self._vol[v] = space.total_measure("lambda")
            self._nbr[v] = ()
            return
        nbrs = set(eng.neighbors_at(eng.index_of(v)))
        nbrs.discard(v)
        a, b = eng.cell_bounds(v)
        if space.density is None:
            L = space.size
            self._vol[v] = (b - a) % L if space.periodic else b - a
        else:
            self._vol[v] = space.region_measure((a, b), "lambda")
        self._nbr[v] = tuple(sorted(nbrs))

    def _cell_2d(self, v, want_nbrs=True):
        """Recompute the cell of engine vertex v.

        Returns True when the neighbour set was stored alongside the
        volume, False when only the volume was.
        """
        eng = self._eng
        space = self.space
        L = space.size
        eps2 = self._eps2
        vol, nbrs, ring, ccs, flags = eng.cell_scan(
            v, eps2, self._ghosts, self._bounded, want_nbrs, self._collect2)
        if not flags:
            if space.density is not None:
                vol = polygon_grid_measure(ccs, space.density, L,
                                           space.periodic) \
                    if len(ccs) >= 3 else 0.0
            self._vol[v] = vol
            if want_nbrs:
                self._nbr[v] = tuple(sorted(set(nbrs)))
                return True
            return False
        if not want_nbrs and space.density is None:
            # volume-only refresh of a cell crossing a single side: fused
            # area clip, no polygon construction
            if flags == 1:
                self._vol[v] = halfplane_area(ccs, -1.0, 0.0, 0.0)
                return False
            if flags == 2:
                self._vol[v] = halfplane_area(ccs, 1.0, 0.0, L)
                return False
            if flags == 4:
                self._vol[v] = halfplane_area(ccs, 0.0, -1.0, 0.0)
                return False
            if flags == 8:
                self._vol[v] = halfplane_area(ccs, 0.0, 1.0, L)
                return False
        # cell protrudes from the chart or touches a ghost: clip against the
        # crossed sides only (cells are convex), and keep the neighbour set
        # since the clip pays for it anyway
        d = len(ring)
        poly = ccs
        clabels = [ring[(k + 1) % d] for k in range(d)]
        if flags & 16:
            flags = 15
        if flags & 1:
            poly, clabels = clip_polygon_halfplane(poly, clabels,
                                                   -1.0, 0.0, 0.0, BOUNDARY)
        if flags & 2:
            poly, clabels = clip_polygon_halfplane(poly, clabels,
                                                   1.0, 0.0, L, BOUNDARY)
        if flags & 4:
            poly, clabels = clip_polygon_halfplane(poly, clabels,
                                                   0.0, -1.0, 0.0, BOUNDARY)
        if flags & 8:
            poly, clabels = clip_polygon_halfplane(poly, clabels,
                                                   0.0, 1.0, L, BOUNDARY)
        nbrs = set()
        m = len(poly)
        for k in range(m):
            lab = clabels[k]
            if lab == BOUNDARY or lab == v or lab in self._ghosts:
                continue
            x1, y1 = poly[k]
            x2, y2 = poly[(k + 1) % m]
            if (x2 - x1) ** 2 + (y2 - y1) ** 2 > eps2:
                nbrs.add(lab)
        if m < 3:
            vol = 0.0
        elif space.density is None:
            vol = abs(polygon_area(poly))
        else:
            vol = polygon_grid_measure(poly, space.density, L, space.periodic)
        self._vol[v] = vol
        self._nbr[v] = tuple(sorted(nbrs))
        return True

    def _clip_all(self):
        """Direct cell extraction for the fallback backend."""
        space = self.space
        L = space.size
        pts = self.points
        n = len(pts)
        eps2 = self._eps2
        reach2 = 2.0 * L * L * (1.0 + 1e-9)
        half = 0.5 * L
        for i in range(n):
            px, py = pts[i]
            if space.periodic:
                poly = [(px - half, py - half), (px + half, py - half),
                        (px + half, py + half), (px - half, py + half)]
                labels = [i, i, i, i]
                for j in range(n):
                    qx, qy = pts[j]
                    for ox in (-2, -1, 0, 1, 2):
                        mx = qx + ox * L
                        for oy in (-2, -1, 0, 1, 2):
                            my = qy + oy * L
                            nx = mx - px
                            ny = my - py
                            if nx == 0.0 and ny == 0.0:
                                continue
                            if nx * nx + ny * ny > reach2:
                                continue
                            # midpoint form avoids cancellation when the
                            # generators are very close together
                            c = nx * (0.5 * (px + mx)) + ny * (0.5 * (py + my))
                            poly, labels = clip_polygon_halfplane(
                                poly, labels, nx, ny, c, j)
            else:
                poly = [(0.0, 0.0), (L, 0.0), (L, L), (0.0, L)]
                labels = [BOUNDARY] * 4
                for j in range(n):
                    if j == i:
                        continue
                    qx, qy = pts[j]
                    nx = qx - px
                    ny = qy - py
                    c = nx * (0.5 * (px + qx)) + ny * (0.5 * (py + qy))
                    poly, labels = clip_polygon_halfplane(
                        poly, labels, nx, ny, c, j)
            nbrs = set()
            m = len(poly)
            for k in range(m):
                lab = labels[k]
                if lab == BOUNDARY or lab == i:
                    continue
                x1, y1 = poly[k]
                x2, y2 = poly[(k + 1) % m]
                if (x2 - x1) ** 2 + (y2 - y1) ** 2 > eps2:
                    nbrs.add(lab)
            if m < 3:
                vol = 0.0
            elif space.density is None:
                vol = abs(polygon_area(poly))
            else:
                vol = polygon_grid_measure(poly, space.density, L,
                                           space.periodic)
            self._vol[i] = vol
            self._nbr[i] = tuple(sorted(nbrs))

    # ------------------------------------------------------------------
    # views

    def cell_volumes(self):
        """Reference-measure volume of every cell, in configuration order."""
        self._refresh(need="vol")
        vol = self._vol
        return np.array([vol[e] for e in self._eid], dtype=float)

    def degrees(self):
        """Number of neighbours of every cell, in configuration order."""
        self._refresh()
        nbr = self._nbr
        return np.array([len(nbr[e]) for e in self._eid], dtype=np.int64)

    def neighbor_sets(self):
        """Neighbour indices of every cell, in configuration order."""
        self._refresh()
        cfg = self._cfg
        return [frozenset(cfg[u] for u in self._nbr[e]) for e in self._eid]

    def volume_of(self, j):
        e = self._eid[j]
        if e in self._dirty_vol:
            self._refresh((e,), "vol")
        return self._vol[e]

    def degree_of(self, j):
        e = self._eid[j]
        if e in self._dirty_nbr:
            self._refresh((e,))
        return len(self._nbr[e])

    def volumes_at(self, indices):
        """Volumes of the given cells (batched refresh, chain hot path)."""
        eid = self._eid
        es = [eid[j] for j in indices]
        dv = self._dirty_vol
        if self._backend == "delaunay2d":
            cell = self._cell_2d
            dn = self._dirty_nbr
            for e in es:
                if e in dv:
                    if cell(e, False):
                        dn.discard(e)
                    dv.discard(e)
        elif any(e in dv for e in es):
            self._refresh(es, "vol")
        vol = self._vol
        return [vol[e] for e in es]

    def degrees_at(self, indices):
        """Degrees of the given cells (batched refresh, chain hot path)."""
        eid = self._eid
        es = [eid[j] for j in indices]
        dn = self._dirty_nbr
        if self._backend == "delaunay2d":
            cell = self._cell_2d
            dv = self._dirty_vol
            for e in es:
                if e in dn:
                    cell(e, True)
                    dn.discard(e)
                    dv.discard(e)
        elif any(e in dn for e in es):
            self._refresh(es)
        nbr = self._nbr
        return [len(nbr[e]) for e in es]

    def snapshot_lines(self):
        """CSV description of every cell (deterministic across reruns)."""
        self._refresh()
        two = self.space.dim == 2
        lines = ["index,x,y,cell_volume,degree,neighbor_list" if two
                 else "index,x,cell_volume,degree,neighbor_list"]
        cfg = self._cfg
        for k, e in enumerate(self._eid):
            p = self.points[k]
            nb = ";".join(str(c) for c in sorted(cfg[u]
                                                 for u in self._nbr[e]))
            if two:
                lines.append(f"{k},{p[0]!r},{p[1]!r},{self._vol[e]!r},"
                             f"{len(self._nbr[e])},{nb}")
            else:
                lines.append(f"{k},{p!r},{self._vol[e]!r},"
                             f"{len(self._nbr[e])},{nb}")
        return lines


def build(points, space):
    """Build the Voronoi tessellation of a configuration."""
    return Tessellation.build(points, space)


def replace_point(tess, j, new_point):
    """Replace point j of a tessellation in place; returns changed indices."""
    return tess.replace_point(j, new_point)


# ----------------------------------------------------------------------
# independent reference statistics from a stratified sample grid


def _wrap_abs(delta, L):
    d = np.abs(delta)
    return np.minimum(d, L - d)


def oracle_cell_stats(points, space, resolution=1_000_000):
    """Approximate cell volumes and adjacency from a dense sample grid.

    Every sample point of a stratified grid (about ``resolution`` of them)
    is assigned to its nearest generator under the space metric; volumes
    are integrated from the label field and adjacency counted over sample
    edges whose endpoints belong to different cells.

    Returns
    -------
    volumes : ndarray
        Approximate reference-measure volume per cell.
    neighbor_sets : list of frozenset
        Cells sharing at least one sample edge.
    boundary_counts : dict
        ``(i, j) -> number of straddling sample edges`` with ``i < j``.
    """
    space_pts = [space.canonicalize(p) for p in points]
    n = len(space_pts)
    L = space.size
    counts = {}

    def tally(a, b):
        m = a != b
        if not m.any():
            return
        lo = np.minimum(a[m], b[m]).astype(np.int64)
        hi = np.maximum(a[m], b[m]).astype(np.int64)
        keys, reps = np.unique(lo * n + hi, return_counts=True)
        for key, rep in zip(keys.tolist(), reps.tolist()):
            pair = divmod(key, n)
            counts[pair] = counts.get(pair, 0) + rep

    if space.dim == 1:
        R = max(int(resolution), n + 1)
        xs = (np.arange(R) + 0.5) * (L / R)
        best = np.full(R, np.inf)
        owner = np.zeros(R, dtype=np.int64)
        for i, p in enumerate(space_pts):
            d = np.abs(xs - p)
            if space.periodic:
                np.minimum(d, L - d, out=d)
            closer = d < best
            owner[closer] = i
            best[closer] = d[closer]
        if space.density is None:
            w = None
        else:
            g = space.density
            idx = np.minimum((xs / L * g.shape[0]).astype(np.int64),
                             g.shape[0] - 1)
            w = g[idx]
        vols = np.bincount(owner, weights=w, minlength=n) * (L / R)
        tally(owner[:-1], owner[1:])
        if space.periodic:
            tally(owner[-1:], owner[:1])
    else:
        G = max(int(round(math.sqrt(resolution))), 2)
        xs = (np.arange(G) + 0.5) * (L / G)
        XX, YY = np.meshgrid(xs, xs)
        best = np.full((G, G), np.inf)
        owner = np.zeros((G, G), dtype=np.int64)
        for i, (px, py) in enumerate(space_pts):
            if space.periodic:
                dx = _wrap_abs(XX - px, L)
                dy = _wrap_abs(YY - py, L)
            else:
                dx = XX - px
                dy = YY - py
            d2 = dx * dx + dy * dy
            closer = d2 < best
            owner[closer] = i
            best[closer] = d2[closer]
        if space.density is None:
            w = None
        else:
            g = space.density
            nrows, ncols = g.shape
            ci = np.minimum((XX / L * ncols).astype(np.int64), ncols - 1)
            ri = np.minimum((YY / L * nrows).astype(np.int64), nrows - 1)
            w = g[ri, ci].ravel()
        vols = np.bincount(owner.ravel(), weights=w,
                           minlength=n) * (L / G) ** 2
        tally(owner[:, :-1].ravel(), owner[:, 1:].ravel())
        tally(owner[:-1, :].ravel(), owner[1:, :].ravel())
        if space.periodic:
            tally(owner[:, -1].ravel(), owner[:, 0].ravel())
            tally(owner[-1, :].ravel(), owner[0, :].ravel())

    nbrs = [set() for _ in range(n)]
    for (i, j) in counts:
        nbrs[i].add(j)
        nbrs[j].add(i)
    return vols, [frozenset(s) for s in nbrs], counts
