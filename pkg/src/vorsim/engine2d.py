"""Incremental Delaunay maintenance for the two-dimensional spaces.

The torus is represented on a one-cover quotient: a triangle stores three
canonical generator ids plus an integer lift per corner and axis, so corner
coordinates are ``x + a*L``.  Valid torus Delaunay triangles have edges no
longer than ``sqrt(2)*L`` (the largest empty-disk diameter), hence lifts fit
in {0, 1, 2} after per-triangle normalization.  Adjacency records carry the
translation that maps the neighbour's stored lifts into the triangle's own
frame.  The square uses the same structure with all lifts zero plus four
distant ghost generators whose hull contains the square, so every real cell
is bounded; ghost bisectors pass nowhere near the square, leaving clipped
cells exact.

Point insertion is cavity-based (conflict search by the in-circle predicate,
fan retriangulation of the cavity ring); deletion collects the star of the
vertex and retriangulates the link polygon by ear cutting with empty-circle
validation.  Any situation the local update cannot represent (a cavity or
star wrapping the torus, an oversized cavity, an inconsistent ring) raises
``Abort2D`` before any mutation, and the caller rebuilds from scratch.

Static builds go through library Delaunay triangulations of a replicated
(torus) or ghost-extended (square) point set, converted to quotient form and
checked; configurations the conversion cannot certify (exactly cocircular
grids across periodic copies, tiny N) fall back to triangulation-free direct
cell clipping in the facade module.
"""

import math

import numpy as np

from .geom2d import circumcenter
from .predicates import incircle, orient2d

_LIFT_MAX = 2  # max normalized lift: edges never exceed sqrt(2)*L

# cyclic corner successors, cheaper than (c + 1) % 3 in the hot walks
_NXT = (1, 2, 0)
_NX2 = (2, 0, 1)

_EMPTY = frozenset()


class Abort2D(Exception):
    """A local structural update cannot be performed; rebuild instead."""


class Engine2D:
    """Triangulation of the current generators of a 2D space."""

    def __init__(self, L, periodic, X, Y, ghosts=()):
        self.L = L
        self.periodic = periodic
        self.X = X
        self.Y = Y
        self.ghosts = frozenset(ghosts)
        self.TRI = []   # (i0, i1, i2, a0, b0, a1, b1, a2, b2) or None
        self.NBR = []   # per slot e: (t2, e2, dx, dy) or None; slot e is the
                        # edge opposite corner e, i.e. corners e+1, e+2
        self.CC = []    # circumcenter in the triangle's stored frame
        self.free = []
        self.incident = {}   # vertex -> (t, corner_slot)
        self.live = 0
        self.nbuckets = 1
        self.bucket_w = L
        self.buckets = {}

    # ------------------------------------------------------------------
    # bucket grid (locate acceleration and exact-duplicate detection)

    def init_buckets(self, real_ids):
        ids = list(real_ids)
        self.rebucket(len(ids), ids)

    def rebucket(self, expected_n, ids):
        n = max(1, int(math.sqrt(max(expected_n, 1))))
        self.nbuckets = n
        self.bucket_w = self.L / n
        self.buckets = {}
        for v in ids:
            self.bucket_add(v)

    def _bucket_xy(self, x, y):
        n = self.nbuckets
        bx = int(x / self.bucket_w)
        by = int(y / self.bucket_w)
        if bx < 0:
            bx = 0
        elif bx >= n:
            bx = n - 1
        if by < 0:
            by = 0
        elif by >= n:
            by = n - 1
        return (bx, by)

    def bucket_add(self, v):
        self.buckets.setdefault(self._bucket_xy(self.X[v], self.Y[v]),
                                set()).add(v)

    def bucket_remove(self, v):
        key = self._bucket_xy(self.X[v], self.Y[v])
        s = self.buckets.get(key)
        if s is not None:
            s.discard(v)

    def has_exact(self, x, y):
        s = self.buckets.get(self._bucket_xy(x, y))
        if not s:
            return False
        X, Y = self.X, self.Y
        return any(X[v] == x and Y[v] == y for v in s)

    def _near_vertex(self, x, y):
        n = self.nbuckets
        bx, by = self._bucket_xy(x, y)
        per = self.periodic
        X, Y, L = self.X, self.Y, self.L
        for r in range(n + 1):
            found = []
            for dx in range(-r, r + 1):
                for dy in range(-r, r + 1):
                    if max(abs(dx), abs(dy)) != r:
                        continue
                    cx, cy = bx + dx, by + dy
                    if per:
                        cx %= n
                        cy %= n
                    elif not (0 <= cx < n and 0 <= cy < n):
                        continue
                    s = self.buckets.get((cx, cy))
                    if s:
                        found.extend(s)
            if found:
                best = None
                bestkey = None
                for v in found:
                    ddx = abs(X[v] - x)
                    ddy = abs(Y[v] - y)
                    if per:
                        if ddx > L - ddx:
                            ddx = L - ddx
                        if ddy > L - ddy:
                            ddy = L - ddy
                    key = (ddx * ddx + ddy * ddy, v)
                    if bestkey is None or key < bestkey:
                        bestkey = key
                        best = v
                return best
        if self.incident:
            return min(self.incident)
        raise Abort2D("no live vertices to start a walk from")

    def _local_cap(self):
        # structural bound: a cavity or star can never exceed the live
        # triangle count, so anything larger means the walk is cycling
        return 2 * max(self.live, 1) + 16

    # ------------------------------------------------------------------
    # point location

    def locate(self, x, y):
        """Triangle node (t, sx, sy) whose lifted corners contain (x, y)."""
        u = self._near_vertex(x, y)
        t, c = self.incident[u]
        tri = self.TRI[t]
        if tri is None or tri[c] != u:
            raise Abort2D("stale incidence pointer")
        L = self.L
        if self.periodic:
            sux = math.floor((x - self.X[u]) / L + 0.5)
            suy = math.floor((y - self.Y[u]) / L + 0.5)
        else:
            sux = suy = 0
        sx = sux - tri[3 + 2 * c]
        sy = suy - tri[4 + 2 * c]
        X, Y = self.X, self.Y
        TRI, NBR = self.TRI, self.NBR
        cap = 4 * (self.live + 4) + 16
        steps = 0
        while True:
            steps += 1
            if steps > cap:
                raise Abort2D("point location walk did not terminate")
            tri = TRI[t]
            i0, i1, i2 = tri[0], tri[1], tri[2]
            p0x = X[i0] + (tri[3] + sx) * L
            p0y = Y[i0] + (tri[4] + sy) * L
            p1x = X[i1] + (tri[5] + sx) * L
            p1y = Y[i1] + (tri[6] + sy) * L
            p2x = X[i2] + (tri[7] + sx) * L
            p2y = Y[i2] + (tri[8] + sy) * L
            if orient2d(p1x, p1y, p2x, p2y, x, y) < 0:
                e = 0
            elif orient2d(p2x, p2y, p0x, p0y, x, y) < 0:
                e = 1
            elif orient2d(p0x, p0y, p1x, p1y, x, y) < 0:
                e = 2
            else:
                return t, sx, sy
            rec = NBR[t][e]
            if rec is None:
                raise Abort2D("walk exited the triangulation")
            t, _, dx, dy = rec
            sx += dx
            sy += dy

    # ------------------------------------------------------------------
    # insertion

    def insert(self, v):
        """Insert vertex v (coords already stored); returns affected ids."""
        x = self.X[v]
        y = self.Y[v]
        t0, sx0, sy0 = self.locate(x, y)
        L = self.L
        X, Y = self.X, self.Y
        TRI, NBR = self.TRI, self.NBR
        cap = self._local_cap()
        NXT, NX2, ic = _NXT, _NX2, incircle

        # conflict search over (triangle, lift) nodes
        seen = {}
        confl = {}   # t -> its single conflicting lift
        stack = [(t0, sx0, sy0)]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            t, sx, sy = node
            tri = TRI[t]
            i0, i1, i2 = tri[0], tri[1], tri[2]
            c = ic(X[i0] + (tri[3] + sx) * L, Y[i0] + (tri[4] + sy) * L,
                   X[i1] + (tri[5] + sx) * L, Y[i1] + (tri[6] + sy) * L,
                   X[i2] + (tri[7] + sx) * L, Y[i2] + (tri[8] + sy) * L,
                   x, y, i0, i1, i2, v) > 0
            seen[node] = c
            if not c:
                continue
            if t in confl:
                raise Abort2D("cavity meets itself around the torus")
            confl[t] = (sx, sy)
            if len(confl) > cap:
                raise Abort2D("cavity too large")
            for rec in NBR[t]:
                if rec is not None:
                    stack.append((rec[0], sx + rec[2], sy + rec[3]))
        if not confl:
            raise Abort2D("insertion point conflicts with no triangle")

        # boundary ring: directed edges of conflicting triangles whose
        # neighbour (across that edge) is not in conflict
        ring_map = {}
        first_key = None
        for t, (sx, sy) in confl.items():
            tri = TRI[t]
            nbr = NBR[t]
            for e in range(3):
                rec = nbr[e]
                if rec is not None:
                    t2 = rec[0]
                    s2 = (sx + rec[2], sy + rec[3])
                    if confl.get(t2) == s2:
                        continue
                    if t2 in confl:
                        # the ring neighbour is another period of a cavity
                        # triangle; committing would strand its adjacency
                        raise Abort2D("cavity ring touches its own period")
                    outer = (t2, rec[1], s2[0], s2[1])
                else:
                    outer = None
                k1 = NXT[e]
                k2 = NX2[e]
                key_a = (tri[k1], tri[3 + 2 * k1] + sx, tri[4 + 2 * k1] + sy)
                key_b = (tri[k2], tri[3 + 2 * k2] + sx, tri[4 + 2 * k2] + sy)
                if key_a in ring_map:
                    raise Abort2D("pinched cavity ring")
                ring_map[key_a] = (key_b, outer)
                if first_key is None:
                    first_key = key_a

        m = len(ring_map)
        if m != len(confl) + 2:
            raise Abort2D("cavity is not a disk")
        ring = []
        key = first_key
        for _ in range(m):
            nxt, outer = ring_map[key]
            ring.append((key, outer))
            key = nxt
        if key != first_key:
            raise Abort2D("cavity ring does not close")

        # plan the fan of new triangles (v, A, B) per ring edge
        plan = []
        for idx in range(m):
            (ia, lax, lay), outer = ring[idx]
            ib, lbx, lby = ring[(idx + 1) % m][0]
            axc = X[ia] + lax * L
            ayc = Y[ia] + lay * L
            bxc = X[ib] + lbx * L
            byc = Y[ib] + lby * L
            if orient2d(axc, ayc, bxc, byc, x, y) <= 0:
                raise Abort2D("cavity ring edge not visible from the point")
            mx = min(0, lax, lbx)
            my = min(0, lay, lby)
            if max(0, lax, lbx) - mx > _LIFT_MAX or max(0, lay, lby) - my > _LIFT_MAX:
                raise Abort2D("new triangle spans too many periods")
            tri = (v, ia, ib, -mx, -my, lax - mx, lay - my, lbx - mx, lby - my)
            try:
                ccx, ccy = circumcenter(x, y, axc, ayc, bxc, byc)
            except ZeroDivisionError:
                raise Abort2D("degenerate new triangle") from None
            plan.append((tri, (ccx - mx * L, ccy - my * L), outer, mx, my))

        # ---- commit ----
        for t in confl:
            TRI[t] = None
            NBR[t] = None
            self.CC[t] = None
            self.free.append(t)
        tids = []
        for _ in range(m):
            if self.free:
                tid = self.free.pop()
            else:
                tid = len(TRI)
                TRI.append(None)
                NBR.append(None)
                self.CC.append(None)
            tids.append(tid)
        for idx in range(m):
            tri, cc, outer, mx, my = plan[idx]
            tid = tids[idx]
            TRI[tid] = tri
            self.CC[tid] = cc
            nxt_idx = (idx + 1) % m
            prv_idx = (idx - 1) % m
            if outer is None:
                rec0 = None
            else:
                t2, e2, s2x, s2y = outer
                rec0 = (t2, e2, s2x - mx, s2y - my)
                NBR[t2][e2] = (tid, 0, mx - s2x, my - s2y)
            NBR[tid] = [
                rec0,
                (tids[nxt_idx], 2, plan[nxt_idx][3] - mx, plan[nxt_idx][4] - my),
                (tids[prv_idx], 1, plan[prv_idx][3] - mx, plan[prv_idx][4] - my),
            ]
            self.incident[tri[1]] = (tid, 1)
        self.incident[v] = (tids[0], 0)
        self.bucket_add(v)
        self.live += 2
        affected = {r[0][0] for r in ring}
        affected.discard(v)
        return affected

    # ------------------------------------------------------------------
    # deletion

    def _star(self, v):
        """Walk the star of v: list of (t, corner_slot_of_v, sx, sy), CCW."""
        TRI, NBR = self.TRI, self.NBR
        NXT = _NXT
        t0, c0 = self.incident.get(v, (None, None))
        if t0 is None:
            raise Abort2D("vertex has no incidence pointer")
        tri = TRI[t0]
        if tri is None or tri[c0] != v:
            raise Abort2D("stale incidence pointer")
        cap = self._local_cap()
        star = [(t0, c0, 0, 0)]
        t, c, sx, sy = t0, c0, 0, 0
        while True:
            e = NXT[c]
            rec = NBR[t][e]
            if rec is None:
                raise Abort2D("star touches the outer boundary")
            t2, e2, dx, dy = rec
            c2 = NXT[e2]
            sx2, sy2 = sx + dx, sy + dy
            tri2 = TRI[t2]
            if tri2 is None or tri2[c2] != v:
                raise Abort2D("adjacency walk lost the vertex")
            if (t2, c2) == (t0, c0):
                if (sx2, sy2) != (0, 0):
                    raise Abort2D("star wraps around the torus")
                return star
            t, c, sx, sy = t2, c2, sx2, sy2
            star.append((t, c, sx, sy))
            if len(star) > cap:
                raise Abort2D("star too large")

    def delete(self, v):
        """Remove vertex v, retriangulating its link; returns affected ids."""
        TRI, NBR = self.TRI, self.NBR
        X, Y, L = self.X, self.Y, self.L
        NXT = _NXT
        t0, c0 = self.incident.get(v, (None, None))
        if t0 is None:
            raise Abort2D("vertex has no incidence pointer")
        tri = TRI[t0]
        if tri is None or tri[c0] != v:
            raise Abort2D("stale incidence pointer")
        cap = self._local_cap()

        # walk the star once, collecting the link ring and its outer
        # adjacency in the walk frame
        star_t = []  # triangle ids in CCW order
        ring = []    # (id, lift_x, lift_y) in the walk frame
        outer = []   # outer neighbour across ring edge (k, k+1)
        seen_outer = set()
        t, c, sx, sy = t0, c0, 0, 0
        while True:
            tri = TRI[t]
            star_t.append(t)
            k1 = NXT[c]
            ring.append((tri[k1], tri[3 + 2 * k1] + sx, tri[4 + 2 * k1] + sy))
            rec = NBR[t][c]
            if rec is None:
                outer.append(None)
            else:
                if TRI[rec[0]][rec[1]] == v:
                    # the neighbour across the link is another period of a
                    # triangle that also vanishes with v
                    raise Abort2D("link touches another period of the vertex")
                key = (rec[0], rec[1])
                if key in seen_outer:
                    raise Abort2D("link uses an outer edge twice")
                seen_outer.add(key)
                outer.append((rec[0], rec[1], sx + rec[2], sy + rec[3]))
            if len(star_t) > cap:
                raise Abort2D("star too large")
            rec = NBR[t][k1]
            if rec is None:
                raise Abort2D("star touches the outer boundary")
            t2, e2, dx, dy = rec
            c2 = NXT[e2]
            sx2, sy2 = sx + dx, sy + dy
            tri2 = TRI[t2]
            if tri2 is None or tri2[c2] != v:
                raise Abort2D("adjacency walk lost the vertex")
            if t2 == t0 and c2 == c0:
                if sx2 or sy2:
                    raise Abort2D("star wraps around the torus")
                break
            t, c, sx, sy = t2, c2, sx2, sy2
        m = len(star_t)
        if m < 3:
            raise Abort2D("degenerate star")
        if len(set(star_t)) != m:
            # a triangle carries v at two corners; the hole in the quotient
            # complex is not the disk around this lift of v
            raise Abort2D("star visits a triangle twice")

        ids = [r[0] for r in ring]
        coords = [(X[i] + lx * L, Y[i] + ly * L) for (i, lx, ly) in ring]

        # ear-cut the link polygon into a Delaunay retriangulation
        nxt = list(range(1, m)) + [0]
        prv = [m - 1] + list(range(m - 1))
        active = m
        plan_idx = []
        cur = 0
        stale = 0
        while active > 3:
            a, b, c = prv[cur], cur, nxt[cur]
            pa, pb, pc = coords[a], coords[b], coords[c]
            good = orient2d(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1]) > 0
            if good:
                u = nxt[c]
                while u != a:
                    pu = coords[u]
                    if incircle(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1],
                                pu[0], pu[1],
                                ids[a], ids[b], ids[c], ids[u]) > 0:
                        good = False
                        break
                    u = nxt[u]
            if good:
                plan_idx.append((a, b, c))
                nxt[a] = c
                prv[c] = a
                active -= 1
                cur = a
                stale = 0
            else:
                cur = nxt[cur]
                stale += 1
                if stale > active + 1:
                    raise Abort2D("no valid ear in link polygon")
        a, b, c = cur, nxt[cur], nxt[nxt[cur]]
        pa, pb, pc = coords[a], coords[b], coords[c]
        if orient2d(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1]) <= 0:
            raise Abort2D("final link triangle is degenerate")
        plan_idx.append((a, b, c))

        # build the new triangle records
        plan = []
        for (a, b, c) in plan_idx:
            la = ring[a][1:]
            lb = ring[b][1:]
            lc = ring[c][1:]
            mx = min(la[0], lb[0], lc[0])
            my = min(la[1], lb[1], lc[1])
            if (max(la[0], lb[0], lc[0]) - mx > _LIFT_MAX
                    or max(la[1], lb[1], lc[1]) - my > _LIFT_MAX):
                raise Abort2D("link triangle spans too many periods")
            tri = (ids[a], ids[b], ids[c],
                   la[0] - mx, la[1] - my,
                   lb[0] - mx, lb[1] - my,
                   lc[0] - mx, lc[1] - my)
            try:
                ccx, ccy = circumcenter(coords[a][0], coords[a][1],
                                        coords[b][0], coords[b][1],
                                        coords[c][0], coords[c][1])
            except ZeroDivisionError:
                raise Abort2D("degenerate link triangle") from None
            plan.append((tri, (ccx - mx * L, ccy - my * L), (mx, my)))

        # stitch adjacency among planned triangles and to the outside
        edge_map = {}
        for k in range(m):
            edge_map[((k + 1) % m, k)] = ("out", outer[k])
        links = [[None, None, None] for _ in plan_idx]
        for pi, (a, b, c) in enumerate(plan_idx):
            for slot, (p, q) in enumerate(((b, c), (c, a), (a, b))):
                rev = edge_map.pop((q, p), None)
                if rev is None:
                    edge_map[(p, q)] = ("new", pi, slot)
                else:
                    if rev[0] == "out":
                        links[pi][slot] = ("out", rev[1])
                    else:
                        _, pj, slot2 = rev
                        links[pi][slot] = ("new", pj, slot2)
                        links[pj][slot2] = ("new", pi, slot)
        if edge_map:
            raise Abort2D("link retriangulation left unmatched edges")

        # ---- commit ----
        for t in star_t:
            TRI[t] = None
            NBR[t] = None
            self.CC[t] = None
            self.free.append(t)
        tids = []
        for _ in plan_idx:
            if self.free:
                tid = self.free.pop()
            else:
                tid = len(TRI)
                TRI.append(None)
                NBR.append(None)
                self.CC.append(None)
            tids.append(tid)
        for pi, (tri, cc, (mx, my)) in enumerate(plan):
            tid = tids[pi]
            TRI[tid] = tri
            self.CC[tid] = cc
            row = [None, None, None]
            for slot in range(3):
                ln = links[pi][slot]
                if ln is None:
                    raise Abort2D("unstitched new triangle edge")
                if ln[0] == "new":
                    _, pj, slot2 = ln
                    ox, oy = plan[pj][2]
                    row[slot] = (tids[pj], slot2, ox - mx, oy - my)
                else:
                    out = ln[1]
                    if out is None:
                        row[slot] = None
                    else:
                        t2, e2, s2x, s2y = out
                        row[slot] = (t2, e2, s2x - mx, s2y - my)
                        NBR[t2][e2] = (tid, slot, mx - s2x, my - s2y)
            NBR[tid] = row
            a, b, c = plan_idx[pi]
            self.incident[ids[a]] = (tid, 0)
            self.incident[ids[b]] = (tid, 1)
            self.incident[ids[c]] = (tid, 2)
        del self.incident[v]
        self.bucket_remove(v)
        self.live -= 2
        return set(ids)

    # ------------------------------------------------------------------
    # cell extraction

    def star_data(self, v):
        """Ring ids and circumcenter polygon around v, both in CCW order.

        Returns ``(ring_ids, cc_points)`` where ``cc_points[k]`` is the
        circumcenter of the k-th star triangle lifted into the walk frame and
        the Voronoi edge dual to generator ``ring_ids[j]`` is the segment
        from ``cc_points[j-1]`` to ``cc_points[j]``.
        """
        star = self._star(v)
        TRI, CC, L = self.TRI, self.CC, self.L
        ring_ids = []
        ccs = []
        for (t, c, sx, sy) in star:
            tri = TRI[t]
            k1 = (c + 1) % 3
            ring_ids.append(tri[k1])
            cc = CC[t]
            ccs.append((cc[0] + sx * L, cc[1] + sy * L))
        return ring_ids, ccs

    def cell_scan(self, v, eps2, ghosts=_EMPTY, bounded=False,
                  want_nbrs=True, collect=True):
        """Star walk fused with cell extraction (the per-step hot path).

        Accumulates the shoelace area of the circumcenter polygon and, when
        ``want_nbrs``, the ring ids whose dual edge is longer than
        ``sqrt(eps2)``, in a single pass.  ``collect=False`` skips building
        the ring/polygon lists for callers that only need numbers.  Returns
        ``(vol, nbrs, ring_ids, ccs, flags)``.  ``flags`` is 0 for a clean
        cell; otherwise it collects the chart sides the polygon crosses
        (1: x<0, 2: x>L, 4: y<0, 8: y>L) and 16 when the ring contains a
        ghost generator, in which case the caller must clip the polygon
        itself and ignore ``vol``/``nbrs``.
        """
        TRI, NBR, CC, L = self.TRI, self.NBR, self.CC, self.L
        t0, c0 = self.incident.get(v, (None, None))
        if t0 is None:
            raise Abort2D("vertex has no incidence pointer")
        tri = TRI[t0]
        if tri is None or tri[c0] != v:
            raise Abort2D("stale incidence pointer")
        cap = self._local_cap()
        NXT = _NXT
        ring = [] if collect else None
        ccs = [] if collect else None
        nbrs = [] if want_nbrs else None
        t, c, sx, sy = t0, c0, 0, 0
        flags = 0
        area2 = 0.0
        px = py = x0 = y0 = 0.0
        first_u = v
        count = 0
        while True:
            tri = TRI[t]
            k = NXT[c]
            u = tri[k]
            cc = CC[t]
            qx = cc[0] + sx * L
            qy = cc[1] + sy * L
            if count:
                area2 += px * qy - qx * py
                if want_nbrs and u != v:
                    dx = qx - px
                    dy = qy - py
                    if dx * dx + dy * dy > eps2:
                        nbrs.append(u)
            else:
                first_u = u
                x0, y0 = qx, qy
            if bounded:
                if qx < 0.0:
                    flags |= 1
                elif qx > L:
                    flags |= 2
                if qy < 0.0:
                    flags |= 4
                elif qy > L:
                    flags |= 8
                if u in ghosts:
                    flags |= 16
            if collect:
                ring.append(u)
                ccs.append((qx, qy))
            px, py = qx, qy
            count += 1
            if count > cap:
                raise Abort2D("star too large")
            rec = NBR[t][k]
            if rec is None:
                raise Abort2D("star touches the outer boundary")
            t2, e2, dx, dy = rec
            c2 = NXT[e2]
            sx2, sy2 = sx + dx, sy + dy
            tri2 = TRI[t2]
            if tri2 is None or tri2[c2] != v:
                raise Abort2D("adjacency walk lost the vertex")
            if t2 == t0 and c2 == c0:
                if sx2 or sy2:
                    raise Abort2D("star wraps around the torus")
                break
            t, c, sx, sy = t2, c2, sx2, sy2
        area2 += px * y0 - x0 * py
        if want_nbrs and first_u != v:
            dx = x0 - px
            dy = y0 - py
            if dx * dx + dy * dy > eps2:
                nbrs.append(first_u)
        return 0.5 * abs(area2), nbrs, ring, ccs, flags

    # ------------------------------------------------------------------
    # whole-structure views (rebuild path, tests)

    def live_triangles(self):
        return [t for t, tri in enumerate(self.TRI) if tri is not None]

    def triangle_frame_coords(self, t):
        tri = self.TRI[t]
        L = self.L
        out = []
        for k in range(3):
            i = tri[k]
            out.append((self.X[i] + tri[3 + 2 * k] * L,
                        self.Y[i] + tri[4 + 2 * k] * L))
        return out

    def validate(self):
        """Exhaustive structural and Delaunay checks (test helper)."""
        TRI, NBR = self.TRI, self.NBR
        L = self.L
        for t in self.live_triangles():
            tri = TRI[t]
            pts = self.triangle_frame_coords(t)
            if orient2d(pts[0][0], pts[0][1], pts[1][0], pts[1][1],
                        pts[2][0], pts[2][1]) <= 0:
                return f"triangle {t} not CCW"
            for e in range(3):
                rec = NBR[t][e]
                if rec is None:
                    continue
                t2, e2, dx, dy = rec
                tri2 = TRI[t2]
                if tri2 is None:
                    return f"triangle {t} points at dead neighbour"
                back = NBR[t2][e2]
                if back is None or back[0] != t or back[1] != e \
                        or back[2] != -dx or back[3] != -dy:
                    return f"adjacency of {t}/{t2} is not mutual"
                # shared corners must agree once shifted
                mine = {(tri[k], tri[3 + 2 * k], tri[4 + 2 * k])
                        for k in ((e + 1) % 3, (e + 2) % 3)}
                theirs = {(tri2[k], tri2[3 + 2 * k] + dx, tri2[4 + 2 * k] + dy)
                          for k in ((e2 + 1) % 3, (e2 + 2) % 3)}
                if mine != theirs:
                    return f"edge mismatch between {t} and {t2}"
                # local Delaunay: opposite vertex outside circumcircle
                k = e2
                ox = self.X[tri2[k]] + (tri2[3 + 2 * k] + dx) * L
                oy = self.Y[tri2[k]] + (tri2[4 + 2 * k] + dy) * L
                if incircle(pts[0][0], pts[0][1], pts[1][0], pts[1][1],
                            pts[2][0], pts[2][1], ox, oy,
                            tri[0], tri[1], tri[2], tri2[k]) > 0:
                    return f"edge {t}/{t2} is not locally Delaunay"
        for v, (t, c) in self.incident.items():
            tri = TRI[t]
            if tri is None or tri[c] != v:
                return f"incidence pointer of vertex {v} is stale"
        return None


# ----------------------------------------------------------------------
# static construction from a library triangulation


def build_engine(points, L, periodic):
    """Build an engine for the given canonical points, or None if no
    backend can represent them (tiny or wrap-degenerate configurations).

    A library triangulation of a replicated (torus) or ghost-framed
    (square) copy of the points is tried first; configurations it cannot
    triangulate consistently fall back to inserting the points one by one
    into a small exactly-resolved seed complex.
    """
    if periodic:
        eng = _torus_engine(points, L)
        if eng is not None and eng.validate() is None:
            return eng
        return _seeded_torus_engine(points, L)
    eng = _square_engine(points, L)
    if eng is not None and eng.validate() is None:
        return eng
    return _seeded_square_engine(points, L)


def _rotate_min(tri):
    """Rotate corner order (preserving orientation) to the least tuple."""
    a = tri
    b = (tri[1], tri[2], tri[0], tri[5], tri[6], tri[7], tri[8], tri[3], tri[4])
    c = (tri[2], tri[0], tri[1], tri[7], tri[8], tri[3], tri[4], tri[5], tri[6])
    return min(a, b, c)


def _stitch(eng, allow_hull):
    """Fill NBR from TRI; return an error string or None."""
    edges = {}
    TRI = eng.TRI
    for t, tri in enumerate(TRI):
        for e in range(3):
            k1 = (e + 1) % 3
            k2 = (e + 2) % 3
            i, j = tri[k1], tri[k2]
            li = (tri[3 + 2 * k1], tri[4 + 2 * k1])
            lj = (tri[3 + 2 * k2], tri[4 + 2 * k2])
            if i < j:
                key = (i, j, lj[0] - li[0], lj[1] - li[1])
                anchor = li
            elif j < i:
                key = (j, i, li[0] - lj[0], li[1] - lj[1])
                anchor = lj
            else:
                d = (lj[0] - li[0], lj[1] - li[1])
                if d == (0, 0):
                    return "triangle with a repeated corner"
                if d < (0, 0):
                    d = (-d[0], -d[1])
                    anchor = lj
                else:
                    anchor = li
                key = (i, i, d[0], d[1])
            edges.setdefault(key, []).append((t, e, anchor))
    for key, refs in edges.items():
        if len(refs) == 1:
            if not allow_hull:
                return "unmatched interior edge"
            t, e, _ = refs[0]
            tri = TRI[t]
            k1, k2 = (e + 1) % 3, (e + 2) % 3
            if tri[k1] not in eng.ghosts or tri[k2] not in eng.ghosts:
                return "hull edge touches a real generator"
            continue
        if len(refs) != 2:
            return "edge shared by more than two triangles"
        (t1, e1, a1), (t2, e2, a2) = refs
        dx, dy = a1[0] - a2[0], a1[1] - a2[1]
        eng.NBR[t1][e1] = (t2, e2, dx, dy)
        eng.NBR[t2][e2] = (t1, e1, -dx, -dy)
    return None


def _finalize(eng, tri_records, real_ids):
    eng.TRI = list(tri_records)
    eng.NBR = [[None, None, None] for _ in tri_records]
    eng.CC = [None] * len(tri_records)
    eng.free = []
    eng.live = len(tri_records)
    for t in range(len(tri_records)):
        pts = eng.triangle_frame_coords(t)
        try:
            eng.CC[t] = circumcenter(pts[0][0], pts[0][1], pts[1][0],
                                     pts[1][1], pts[2][0], pts[2][1])
        except ZeroDivisionError:
            return None
    err = _stitch(eng, allow_hull=not eng.periodic)
    if err is not None:
        return None
    for t, tri in enumerate(eng.TRI):
        for c in range(3):
            eng.incident[tri[c]] = (t, c)
    if set(eng.incident) != set(real_ids) | set(eng.ghosts):
        return None
    eng.init_buckets(real_ids)
    return eng


def _torus_engine(points, L):
    try:
        from scipy.spatial import Delaunay as _SciDelaunay
        from scipy.spatial import QhullError
    except ImportError:  # pragma: no cover
        return None
    n = len(points)
    if n < 3:
        return None
    base = np.asarray(points, dtype=float)
    margin = 1e-9 * L
    for reps in (1, 2):
        offs = [(ox, oy) for oy in range(-reps, reps + 1)
                for ox in range(-reps, reps + 1)]
        stacked = np.vstack([base + [ox * L, oy * L] for ox, oy in offs])
        try:
            dt = _SciDelaunay(stacked)
        except (QhullError, ValueError):
            return None
        lo = -reps * L + margin
        hi = (reps + 1) * L - margin
        tris = {}
        certified = True
        for simplex in dt.simplices:
            corners = []
            central = False
            for q in simplex:
                r, i = divmod(int(q), n)
                ox, oy = offs[r]
                if ox == 0 and oy == 0:
                    central = True
                corners.append((i, ox, oy))
            if not central:
                continue
            pts = [(base[i, 0] + ox * L, base[i, 1] + oy * L)
                   for i, ox, oy in corners]
            o = orient2d(pts[0][0], pts[0][1], pts[1][0], pts[1][1],
                         pts[2][0], pts[2][1])
            if o == 0:
                certified = False
                break
            if o < 0:
                corners[1], corners[2] = corners[2], corners[1]
                pts[1], pts[2] = pts[2], pts[1]
            try:
                ccx, ccy = circumcenter(pts[0][0], pts[0][1], pts[1][0],
                                        pts[1][1], pts[2][0], pts[2][1])
            except ZeroDivisionError:
                certified = False
                break
            rad = math.hypot(pts[0][0] - ccx, pts[0][1] - ccy)
            if not (ccx - rad >= lo and ccx + rad <= hi
                    and ccy - rad >= lo and ccy + rad <= hi):
                # the empty disk is not certifiably inside the replication
                # block, so emptiness in the infinite periodic set is unknown
                certified = False
                break
            mx = min(c[1] for c in corners)
            my = min(c[2] for c in corners)
            if (max(c[1] for c in corners) - mx > _LIFT_MAX
                    or max(c[2] for c in corners) - my > _LIFT_MAX):
                certified = False
                break
            rec = (corners[0][0], corners[1][0], corners[2][0],
                   corners[0][1] - mx, corners[0][2] - my,
                   corners[1][1] - mx, corners[1][2] - my,
                   corners[2][1] - mx, corners[2][2] - my)
            key = _rotate_min(rec)
            tris[key] = key
        if not certified or len(tris) != 2 * n:
            continue
        eng = Engine2D(L, True, [float(p[0]) for p in points],
                       [float(p[1]) for p in points])
        eng = _finalize(eng, sorted(tris), range(n))
        if eng is not None:
            return eng
    return None


def _square_engine(points, L):
    try:
        from scipy.spatial import Delaunay as _SciDelaunay
        from scipy.spatial import QhullError
    except ImportError:  # pragma: no cover
        return None
    n = len(points)
    if n < 1:
        return None
    ghosts = [(-8.0 * L, -8.0 * L), (9.0 * L, -8.0 * L),
              (9.0 * L, 9.0 * L), (-8.0 * L, 9.0 * L)]
    arr = np.vstack([np.asarray(points, dtype=float), np.asarray(ghosts)])
    try:
        dt = _SciDelaunay(arr)
    except (QhullError, ValueError):
        return None
    tris = []
    for simplex in dt.simplices:
        i0, i1, i2 = (int(q) for q in simplex)
        o = orient2d(arr[i0, 0], arr[i0, 1], arr[i1, 0], arr[i1, 1],
                     arr[i2, 0], arr[i2, 1])
        if o == 0:
            return None
        if o < 0:
            i1, i2 = i2, i1
        tris.append(_rotate_min((i0, i1, i2, 0, 0, 0, 0, 0, 0)))
    X = [float(arr[i, 0]) for i in range(n + 4)]
    Y = [float(arr[i, 1]) for i in range(n + 4)]
    eng = Engine2D(L, False, X, Y, ghosts=range(n, n + 4))
    return _finalize(eng, sorted(tris), range(n))


# ----------------------------------------------------------------------
# seeded incremental construction (fallback when the library
# triangulation cannot be certified or is not exactly Delaunay)


_GHOST_CORNERS = ((-8.0, -8.0), (9.0, -8.0), (9.0, 9.0), (-8.0, 9.0))


def _quad_records(ids, lifts, coords):
    """Split a counterclockwise cocircular-or-convex quad into the two
    triangles of its exactly resolved Delaunay diagonal.

    ``ids``, ``lifts`` and ``coords`` list the four corners in CCW order;
    coords are lifted float positions.
    """
    (i0, i1, i2, i3) = ids
    c = incircle(coords[0][0], coords[0][1], coords[1][0], coords[1][1],
                 coords[2][0], coords[2][1], coords[3][0], coords[3][1],
                 i0, i1, i2, i3)
    if c < 0:
        corner_sets = ((0, 1, 2), (0, 2, 3))
    else:
        corner_sets = ((1, 2, 3), (1, 3, 0))
    recs = []
    for cs in corner_sets:
        mx = min(lifts[k][0] for k in cs)
        my = min(lifts[k][1] for k in cs)
        rec = (ids[cs[0]], ids[cs[1]], ids[cs[2]],
               lifts[cs[0]][0] - mx, lifts[cs[0]][1] - my,
               lifts[cs[1]][0] - mx, lifts[cs[1]][1] - my,
               lifts[cs[2]][0] - mx, lifts[cs[2]][1] - my)
        recs.append(_rotate_min(rec))
    return recs


def _seeded_torus_engine(points, L):
    """Insert all points into an exactly resolved 3x3 lattice complex,
    then remove the nine lattice seeds.

    A 3x3 lattice keeps the largest empty disk below L/4 for the whole
    insertion phase, which rules out every torus-wrap abort of ``insert``:
    two periods of the same triangle can never both meet a cavity.
    """
    n = len(points)
    if n < 1:
        return None
    h = L / 3.0
    taken = set(points)
    seeds = None
    for k in range(16):
        dx = ((k * 0.3819660112501051 + 0.06180339887) % 1.0) * h
        dy = ((k * 0.6180339887498949 + 0.23606797749) % 1.0) * h
        cand = [(dx + a * h, dy + b * h) for b in range(3) for a in range(3)]
        if not any(s in taken for s in cand):
            seeds = cand
            break
    if seeds is None:
        return None
    sid = list(range(n, n + 9))
    X = [p[0] for p in points] + [s[0] for s in seeds]
    Y = [p[1] for p in points] + [s[1] for s in seeds]
    eng = Engine2D(L, True, X, Y)

    def corner(aa, bb):
        return (sid[3 * (bb % 3) + (aa % 3)], aa // 3, bb // 3)

    recs = set()
    for a in range(3):
        for b in range(3):
            quad = [corner(a, b), corner(a + 1, b),
                    corner(a + 1, b + 1), corner(a, b + 1)]
            ids = [q[0] for q in quad]
            lifts = [(q[1], q[2]) for q in quad]
            coords = [(X[q[0]] + q[1] * L, Y[q[0]] + q[2] * L) for q in quad]
            recs.update(_quad_records(ids, lifts, coords))
    eng = _finalize(eng, sorted(recs), sid)
    if eng is None:
        return None
    eng.rebucket(n + 9, sid)
    try:
        for v in range(n):
            eng.insert(v)
        for s in sid:
            eng.delete(s)
    except Abort2D:
        return None
    return eng


def _seeded_square_engine(points, L):
    """Insert all points into a ghost frame whose diagonal is exactly
    resolved; the ghosts stay, as in the library path."""
    n = len(points)
    if n < 1:
        return None
    ghosts = [(gx * L, gy * L) for gx, gy in _GHOST_CORNERS]
    sid = [n, n + 1, n + 2, n + 3]
    X = [p[0] for p in points] + [g[0] for g in ghosts]
    Y = [p[1] for p in points] + [g[1] for g in ghosts]
    eng = Engine2D(L, False, X, Y, ghosts=sid)
    lifts = [(0, 0)] * 4
    coords = list(ghosts)
    recs = _quad_records(sid, lifts, coords)
    eng = _finalize(eng, sorted(set(recs)), ())
    if eng is None:
        return None
    eng.rebucket(n + 4, sid)
    try:
        for v in range(n):
            eng.insert(v)
    except Abort2D:
        return None
    return eng
