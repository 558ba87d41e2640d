"""Robust planar orientation and in-circle tests.

Both predicates evaluate a floating-point determinant first and accept its
sign whenever a static forward-error bound certifies it.  Otherwise the
determinant is recomputed in exact rational arithmetic.  An exactly zero
in-circle determinant (cocircular points) is resolved by symbolically
perturbing the paraboloid lifting of each point downward by an amount that
decreases with the point's id, so ties always break the same way for the
same generators and the resulting triangulation stays globally consistent.
"""

from fractions import Fraction

from .errors import VorsimError

_EPS = 2.0 ** -53
# Static error-bound coefficients for the naive determinant evaluations,
# per the classical adaptive-precision analysis for IEEE doubles.
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


class PerturbationFailure(VorsimError):
    """The symbolic perturbation could not resolve a degenerate in-circle test.

    Only reachable for multiply-covered quadruples (two periodic images of
    each of two generators, exactly cocircular); callers fall back to a full
    rebuild through a triangulation-free path.
    """


def orient2d(ax, ay, bx, by, cx, cy):
    """Sign of twice the signed area of (a, b, c): 1 if CCW, -1 if CW, 0 if collinear."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    if detleft > 0.0:
        if detright <= 0.0:
            return 1 if det > 0.0 else (-1 if det < 0.0 else 0)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return 1 if det > 0.0 else (-1 if det < 0.0 else 0)
        detsum = -detleft - detright
    else:
        return 1 if det > 0.0 else (-1 if det < 0.0 else 0)
    errbound = _CCW_BOUND * detsum
    if det >= errbound:
        return 1
    if -det >= errbound:
        return -1
    return orient2d_exact(ax, ay, bx, by, cx, cy)


def orient2d_exact(ax, ay, bx, by, cx, cy):
    """Exact sign of the orientation determinant via rational arithmetic."""
    acx = Fraction(ax) - Fraction(cx)
    acy = Fraction(ay) - Fraction(cy)
    bcx = Fraction(bx) - Fraction(cx)
    bcy = Fraction(by) - Fraction(cy)
    det = acx * bcy - acy * bcx
    if det > 0:
        return 1
    if det < 0:
        return -1
    return 0


def incircle(ax, ay, bx, by, cx, cy, dx, dy, ia, ib, ic, id_):
    """Return 1 if d lies strictly inside the circumcircle of CCW (a, b, c), else -1.

    Never returns 0: exact cocircularity is broken by the id-indexed
    perturbation, with smaller ids acting as if lifted slightly lower on the
    paraboloid.  ``ia .. id_`` are the generator ids of the four points;
    periodic images share the id of their canonical generator.
    """
    adx = ax - dx
    ady = ay - dy
    bdx = bx - dx
    bdy = by - dy
    cdx = cx - dx
    cdy = cy - dy

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady

    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy

    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (alift * (bdxcdy - cdxbdy)
           + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))

    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    errbound = _ICC_BOUND * permanent
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy, ia, ib, ic, id_)


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy, ia, ib, ic, id_):
    fax, fay = Fraction(ax), Fraction(ay)
    fbx, fby = Fraction(bx), Fraction(by)
    fcx, fcy = Fraction(cx), Fraction(cy)
    fdx, fdy = Fraction(dx), Fraction(dy)

    adx = fax - fdx
    ady = fay - fdy
    bdx = fbx - fdx
    bdy = fby - fdy
    cdx = fcx - fdx
    cdy = fcy - fdy

    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    if det > 0:
        return 1
    if det < 0:
        return -1

    # Exactly cocircular.  Expand the 4x4 lifted determinant in the
    # perturbations eps_r = eps^(id_r + 1): rows in order (a, b, c, d), the
    # z-column cofactor of row r is (-1)^r times the orientation determinant
    # of the other three rows kept in row order.  The smallest id carries the
    # largest perturbation and dominates; equal ids (periodic images of one
    # generator) share an epsilon, so their cofactors are summed.
    rows = ((fax, fay), (fbx, fby), (fcx, fcy), (fdx, fdy))
    ids = (ia, ib, ic, id_)
    for wanted in sorted(set(ids)):
        coeff = Fraction(0)
        for r in range(4):
            if ids[r] != wanted:
                continue
            (px, py), (qx, qy), (sx, sy) = [rows[k] for k in range(4) if k != r]
            minor = (qx - px) * (sy - py) - (qy - py) * (sx - px)
            coeff += minor if r % 2 == 0 else -minor
        if coeff > 0:
            return -1
        if coeff < 0:
            return 1
    raise PerturbationFailure(
        "cocircular quadruple not resolvable by the id-indexed perturbation")
