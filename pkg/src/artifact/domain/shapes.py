"""Constructive solid geometry for lattice domain classification and ray probes.

Shapes are closed-form regions of R^N (N = 2 or 3 in practice) built from a
small set of primitives plus union / intersection / complement / difference.
Every shape answers three questions, all vectorized over numpy point arrays:

* ``inside_open(points)``  -- strictly interior points of the region,
* ``inside_closed(points)`` -- points of the closure,
* ``line_closed(x, dirs)`` / ``line_co_closed(x, dirs)`` -- for the full line
  ``{x + t*d : t in R}``, the parameter set hitting the closure of the shape
  (respectively the closure of its complement), as unions of closed intervals.

The open/closed split matters: lattice classification treats points *on* a
surface as outside the open region, while ray probes against thin obstacles
(a slit, a folded sheet) must see the sheet exactly even though it has zero
measure.  Interval arithmetic keeps degenerate single-point hits ``[t*, t*]``,
so a line piercing a slit reports the hit that any sampling scheme would miss.

Complements are pushed down to primitives (De Morgan), where the closure of
the complement has a closed form: for a solid primitive it flips each defining
inequality, and for a measure-zero sheet it is the whole space.  Unions of
closures are exact; intersections of closures may overreport by boundary
touching sets, which is harmless for measure estimates.

Shapes serialize to plain dicts (``to_dict`` / ``shape_from_dict``) so
scenario files can describe geometry in JSON.
"""

import math

import numpy as np

__all__ = [
    "Shape",
    "Ball",
    "Box",
    "Halfspace",
    "SolidCone",
    "FlatCone",
    "TwistedCone",
    "PowerCusp",
    "Union",
    "Intersection",
    "Complement",
    "Difference",
    "shape_from_dict",
]

# Tolerance for "point sits on a zero-thickness sheet" tests.  Lattice node
# coordinates are origin + k*h with relative rounding ~1e-16, so 1e-12 is
# comfortably above float noise and far below any grid spacing in use.
SHEET_TOL = 1e-12

_INF = np.inf


# ---------------------------------------------------------------------------
# Interval sets along a line, vectorized over rays.
#
# A set is a pair of float arrays (lo, hi) of shape (nrays, nslots); slot j of
# row i is the closed interval [lo[i,j], hi[i,j]], empty when lo > hi.  Slots
# need not be sorted except where noted.  All operations are closed-set
# algebra: touching intervals merge under union.
# ---------------------------------------------------------------------------


def iv_empty(n):
    return np.full((n, 1), _INF), np.full((n, 1), -_INF)


def iv_full(n):
    return np.full((n, 1), -_INF), np.full((n, 1), _INF)


def iv_nonempty(iv):
    lo, hi = iv
    return np.any(lo <= hi, axis=1)


def iv_union(a, b):
    """Union of two interval sets, merged and sorted by lower endpoint."""
    lo = np.concatenate([a[0], b[0]], axis=1)
    hi = np.concatenate([a[1], b[1]], axis=1)
    # Empty slots sort to the end because their lo is +inf.
    lo = np.where(lo <= hi, lo, _INF)
    hi = np.where(lo <= hi, hi, -_INF)
    order = np.argsort(lo, axis=1)
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    n, m = lo.shape
    # Assign a component id to every slot: a new component starts where the
    # slot's lo exceeds the running max of previous hi's (closed sets merge
    # when touching, hence strict >).
    run_hi = np.full(n, -_INF)
    seen = np.zeros(n, dtype=bool)
    cid = np.zeros((n, m), dtype=np.int64)
    comp = np.zeros(n, dtype=np.int64)
    for j in range(m):
        slot_lo = lo[:, j]
        slot_hi = hi[:, j]
        nonempty = slot_lo <= slot_hi
        # The first nonempty slot always starts a component, even when its
        # lower end is -inf and cannot exceed the running maximum.
        starts = nonempty & (~seen | (slot_lo > run_hi))
        comp = comp + starts
        cid[:, j] = comp
        run_hi = np.where(nonempty, np.maximum(run_hi, slot_hi), run_hi)
        seen = seen | nonempty
    out_lo = np.full((n, m + 1), _INF)
    out_hi = np.full((n, m + 1), -_INF)
    rows = np.repeat(np.arange(n), m)
    flat_cid = cid.ravel()
    keep = (lo <= hi).ravel()
    np.minimum.at(out_lo, (rows[keep], flat_cid[keep]), lo.ravel()[keep])
    np.maximum.at(out_hi, (rows[keep], flat_cid[keep]), hi.ravel()[keep])
    return _iv_trim((out_lo[:, 1:], out_hi[:, 1:]))


def iv_intersect(a, b):
    """Intersection of two interval sets (pairwise slot intersections)."""
    lo = np.maximum(a[0][:, :, None], b[0][:, None, :])
    hi = np.minimum(a[1][:, :, None], b[1][:, None, :])
    n = lo.shape[0]
    lo = lo.reshape(n, -1)
    hi = hi.reshape(n, -1)
    return _iv_trim((lo, hi))


def iv_intersect_many(sets):
    out = sets[0]
    for s in sets[1:]:
        out = iv_intersect(out, s)
    return out


def _iv_trim(iv):
    """Drop slots that are empty in every row (keep at least one slot)."""
    lo, hi = iv
    used = np.any(lo <= hi, axis=0)
    if not used.any():
        return iv_empty(lo.shape[0])
    return lo[:, used], hi[:, used]


def _halfspace_iv(alpha, beta):
    """Interval set of {t : alpha*t <= beta}, per-row coefficients."""
    n = alpha.shape[0]
    lo = np.full((n, 1), -_INF)
    hi = np.full((n, 1), _INF)
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = beta / alpha
    pos = alpha > 0
    neg = alpha < 0
    zero = ~pos & ~neg
    hi[pos, 0] = bound[pos]
    lo[neg, 0] = bound[neg]
    # alpha == 0: whole line when the constant satisfies the inequality.
    infeasible = zero & (beta < 0)
    lo[infeasible, 0] = _INF
    hi[infeasible, 0] = -_INF
    return lo, hi


def _quad_le_iv(a, b, c):
    """Interval set of {t : a*t^2 + b*t + c <= 0}, per-row coefficients."""
    n = a.shape[0]
    lo = np.full((n, 2), _INF)
    hi = np.full((n, 2), -_INF)
    tiny = 1e-300
    quad = np.abs(a) > tiny
    disc = b * b - 4.0 * a * c
    has_roots = quad & (disc >= 0.0)
    sq = np.sqrt(np.where(has_roots, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = (-b - sq) / (2.0 * a)
        r2 = (-b + sq) / (2.0 * a)
    rlo = np.minimum(r1, r2)
    rhi = np.maximum(r1, r2)
    # Opens upward: solution is [rlo, rhi] (empty without real roots).
    up = has_roots & (a > 0)
    lo[up, 0] = rlo[up]
    hi[up, 0] = rhi[up]
    # Opens downward: solution is (-inf, rlo] U [rhi, inf); without real
    # roots the parabola is everywhere negative.
    down = quad & (a < 0)
    down_roots = down & has_roots
    lo[down_roots, 0] = -_INF
    hi[down_roots, 0] = rlo[down_roots]
    lo[down_roots, 1] = rhi[down_roots]
    hi[down_roots, 1] = _INF
    down_all = down & ~has_roots
    lo[down_all, 0] = -_INF
    hi[down_all, 0] = _INF
    # Degenerate linear case.
    lin = ~quad
    if lin.any():
        llo, lhi = _halfspace_iv(np.where(lin, b, 1.0), np.where(lin, -c, 1.0))
        lo[lin, 0] = llo[lin, 0]
        hi[lin, 0] = lhi[lin, 0]
    return lo, hi


def _plane_iv(alpha, beta, tol):
    """Interval set of {t : |alpha*t - beta| <= tol} (sheet crossing)."""
    n = alpha.shape[0]
    lo = np.full((n, 1), _INF)
    hi = np.full((n, 1), -_INF)
    moving = np.abs(alpha) > 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (beta - tol) / alpha
        t2 = (beta + tol) / alpha
    tlo = np.minimum(t1, t2)
    thi = np.maximum(t1, t2)
    lo[moving, 0] = tlo[moving]
    hi[moving, 0] = thi[moving]
    inplane = ~moving & (np.abs(beta) <= tol)
    lo[inplane, 0] = -_INF
    hi[inplane, 0] = _INF
    return lo, hi


# ---------------------------------------------------------------------------
# Shape base class and primitives.
# ---------------------------------------------------------------------------


def _as_points(points, dim):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[1] != dim:
        raise ValueError(f"expected points in R^{dim}, got shape {pts.shape}")
    return pts


class Shape:
    """Base class: a region of R^N with open/closed membership and ray casts."""

    dim = None

    def inside_open(self, points):
        raise NotImplementedError

    def inside_closed(self, points):
        raise NotImplementedError

    def line_closed(self, x, dirs):
        """Closed parameter intervals where the line x + t*d meets closure(self)."""
        raise NotImplementedError

    def line_co_closed(self, x, dirs):
        """Closed parameter intervals where the line meets closure(complement)."""
        raise NotImplementedError

    def bbox(self):
        """Axis-aligned bounding box (lo, hi) arrays, or None if unbounded."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def diameter(self):
        box = self.bbox()
        if box is None:
            raise ValueError("shape is unbounded")
        lo, hi = box
        return float(np.linalg.norm(hi - lo))

    # Conveniences -----------------------------------------------------------

    def union(self, other):
        return Union([self, other])

    def intersect(self, other):
        return Intersection([self, other])

    def minus(self, other):
        return Difference(self, other)


class Ball(Shape):
    """Euclidean ball {|x - center| < radius} (closure: <=)."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        self.dim = self.center.shape[0]

    def inside_open(self, points):
        pts = _as_points(points, self.dim)
        d2 = np.sum((pts - self.center) ** 2, axis=1)
        return d2 < self.radius**2

    def inside_closed(self, points):
        pts = _as_points(points, self.dim)
        d2 = np.sum((pts - self.center) ** 2, axis=1)
        return d2 <= self.radius**2

    def _quad_coeffs(self, x, dirs):
        rel = np.asarray(x, dtype=float) - self.center
        a = np.sum(dirs * dirs, axis=1)
        b = 2.0 * dirs @ rel
        c = np.full(dirs.shape[0], rel @ rel - self.radius**2)
        return a, b, c

    def line_closed(self, x, dirs):
        return _quad_le_iv(*self._quad_coeffs(x, dirs))

    def line_co_closed(self, x, dirs):
        a, b, c = self._quad_coeffs(x, dirs)
        return _quad_le_iv(-a, -b, -c)

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def to_dict(self):
        return {"type": "ball", "center": list(self.center), "radius": self.radius}


class Box(Shape):
    """Axis-aligned box {lo < x < hi} (closure: <=)."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != self.hi.shape or np.any(self.lo >= self.hi):
            raise ValueError("box needs lo < hi componentwise")
        self.dim = self.lo.shape[0]

    def inside_open(self, points):
        pts = _as_points(points, self.dim)
        return np.all((pts > self.lo) & (pts < self.hi), axis=1)

    def inside_closed(self, points):
        pts = _as_points(points, self.dim)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def line_closed(self, x, dirs):
        x = np.asarray(x, dtype=float)
        parts = []
        for k in range(self.dim):
            # x_k + t*d_k <= hi_k and -(x_k + t*d_k) <= -lo_k
            parts.append(_halfspace_iv(dirs[:, k], np.full(dirs.shape[0], self.hi[k] - x[k])))
            parts.append(_halfspace_iv(-dirs[:, k], np.full(dirs.shape[0], x[k] - self.lo[k])))
        return iv_intersect_many(parts)

    def line_co_closed(self, x, dirs):
        x = np.asarray(x, dtype=float)
        out = None
        for k in range(self.dim):
            for alpha, beta in (
                (-dirs[:, k], np.full(dirs.shape[0], -(self.hi[k] - x[k]))),
                (dirs[:, k], np.full(dirs.shape[0], -(x[k] - self.lo[k]))),
            ):
                part = _halfspace_iv(alpha, beta)
                out = part if out is None else iv_union(out, part)
        return out

    def bbox(self):
        return self.lo.copy(), self.hi.copy()

    def to_dict(self):
        return {"type": "box", "lo": list(self.lo), "hi": list(self.hi)}


class Halfspace(Shape):
    """Halfspace {normal . x < offset} (closure: <=).  Unbounded."""

    def __init__(self, normal, offset):
        self.normal = np.asarray(normal, dtype=float)
        norm = np.linalg.norm(self.normal)
        if norm == 0:
            raise ValueError("halfspace normal must be nonzero")
        self.normal = self.normal / norm
        self.offset = float(offset) / norm
        self.dim = self.normal.shape[0]

    def inside_open(self, points):
        pts = _as_points(points, self.dim)
        return pts @ self.normal < self.offset

    def inside_closed(self, points):
        pts = _as_points(points, self.dim)
        return pts @ self.normal <= self.offset

    def line_closed(self, x, dirs):
        x = np.asarray(x, dtype=float)
        beta = np.full(dirs.shape[0], self.offset - x @ self.normal)
        return _halfspace_iv(dirs @ self.normal, beta)

    def line_co_closed(self, x, dirs):
        x = np.asarray(x, dtype=float)
        beta = np.full(dirs.shape[0], -(self.offset - x @ self.normal))
        return _halfspace_iv(-(dirs @ self.normal), beta)

    def bbox(self):
        return None

    def to_dict(self):
        return {"type": "halfspace", "normal": list(self.normal), "offset": self.offset}


class SolidCone(Shape):
    """Truncated solid cone with vertex, unit axis, opening parameter, radius.

    The closed set is {q = x - vertex : q.axis >= 0, |q| <= radius,
    |q|^2 <= (1 + opening) * (q.axis)^2}.  Larger opening means a wider cone;
    the aperture half-angle is arctan(sqrt(opening)).
    """

    def __init__(self, vertex, axis, opening, radius):
        self.vertex = np.asarray(vertex, dtype=float)
        axis = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ValueError("cone axis must be nonzero")
        self.axis = axis / norm
        self.opening = float(opening)
        self.radius = float(radius)
        if self.opening <= 0 or self.radius <= 0:
            raise ValueError("cone needs positive opening and radius")
        self.dim = self.vertex.shape[0]

    def _conditions(self, points):
        q = _as_points(points, self.dim) - self.vertex
        s = q @ self.axis
        q2 = np.sum(q * q, axis=1)
        return s, q2

    def inside_open(self, points):
        s, q2 = self._conditions(points)
        return (s > 0) & (q2 < self.radius**2) & (q2 < (1.0 + self.opening) * s * s)

    def inside_closed(self, points):
        s, q2 = self._conditions(points)
        return (s >= 0) & (q2 <= self.radius**2) & (q2 <= (1.0 + self.opening) * s * s)

    def _cone_quads(self, x, dirs):
        """Quadratic coefficients of the three defining inequalities (as <= 0)."""
        rel = np.asarray(x, dtype=float) - self.vertex
        dd = np.sum(dirs * dirs, axis=1)
        dr = dirs @ rel
        rr = np.full(dirs.shape[0], rel @ rel)
        da = dirs @ self.axis
        ra = np.full(dirs.shape[0], rel @ self.axis)
        k = 1.0 + self.opening
        # |q|^2 - (1+w)(q.a)^2 <= 0
        cone = (dd - k * da * da, 2.0 * (dr - k * da * ra), rr - k * ra * ra)
        # |q|^2 - radius^2 <= 0
        ball = (dd, 2.0 * dr, rr - self.radius**2)
        # -(q.a) <= 0, i.e. -da*t <= ra
        axis = (-da, ra)
        return cone, ball, axis

    def line_closed(self, x, dirs):
        cone, ball, axis = self._cone_quads(x, dirs)
        return iv_intersect_many(
            [_quad_le_iv(*cone), _quad_le_iv(*ball), _halfspace_iv(*axis)]
        )

    def line_co_closed(self, x, dirs):
        cone, ball, axis = self._cone_quads(x, dirs)
        out = _quad_le_iv(-cone[0], -cone[1], -cone[2])
        out = iv_union(out, _quad_le_iv(-ball[0], -ball[1], -ball[2]))
        out = iv_union(out, _halfspace_iv(-axis[0], -axis[1]))
        return out

    def bbox(self):
        return self.vertex - self.radius, self.vertex + self.radius

    def to_dict(self):
        return {
            "type": "solid_cone",
            "vertex": list(self.vertex),
            "axis": list(self.axis),
            "opening": self.opening,
            "radius": self.radius,
        }


class FlatCone(Shape):
    """Zero-thickness cone sheet inside the hyperplane {x_N = vertex_N}.

    The sheet is {q = x - vertex : q_N = 0, q.axis >= 0, |q| <= radius,
    |q|^2 <= (1 + opening) (q.axis)^2}, with ``axis`` a unit vector orthogonal
    to e_N.  In R^2 with opening >= 0 this degenerates to the segment from the
    vertex of length ``radius`` along ``axis`` (a slit).  The open interior is
    empty; ray casts report degenerate [t*, t*] hits.
    """

    def __init__(self, vertex, axis, opening, radius):
        self.vertex = np.asarray(vertex, dtype=float)
        axis = np.asarray(axis, dtype=float)
        self.dim = self.vertex.shape[0]
        if abs(axis[self.dim - 1]) > 1e-14:
            raise ValueError("flat cone axis must be orthogonal to the sheet normal e_N")
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ValueError("flat cone axis must be nonzero")
        self.axis = axis / norm
        self.opening = float(opening)
        self.radius = float(radius)
        if self.opening < 0 or self.radius <= 0:
            raise ValueError("flat cone needs opening >= 0 and positive radius")

    def inside_open(self, points):
        pts = _as_points(points, self.dim)
        return np.zeros(pts.shape[0], dtype=bool)

    def inside_closed(self, points):
        q = _as_points(points, self.dim) - self.vertex
        on_sheet = np.abs(q[:, -1]) <= SHEET_TOL
        s = q @ self.axis
        q2 = np.sum(q * q, axis=1)
        return (
            on_sheet
            & (s >= -SHEET_TOL)
            & (q2 <= self.radius**2 + SHEET_TOL)
            & (q2 <= (1.0 + self.opening) * s * s + SHEET_TOL)
        )

    def line_closed(self, x, dirs):
        x = np.asarray(x, dtype=float)
        rel = x - self.vertex
        n = dirs.shape[0]
        plane = _plane_iv(dirs[:, -1], np.full(n, -rel[-1]), SHEET_TOL)
        dd = np.sum(dirs * dirs, axis=1)
        dr = dirs @ rel
        rr = np.full(n, rel @ rel)
        da = dirs @ self.axis
        ra = np.full(n, rel @ self.axis)
        k = 1.0 + self.opening
        parts = [
            plane,
            _halfspace_iv(-da, ra + SHEET_TOL),
            _quad_le_iv(dd, 2.0 * dr, rr - self.radius**2 - SHEET_TOL),
            _quad_le_iv(
                dd - k * da * da,
                2.0 * (dr - k * da * ra),
                rr - k * ra * ra - SHEET_TOL,
            ),
        ]
        return iv_intersect_many(parts)

    def line_co_closed(self, x, dirs):
        # The sheet has empty interior, so the closure of its complement is
        # all of R^N.
        return iv_full(dirs.shape[0])

    def bbox(self):
        return self.vertex - self.radius, self.vertex + self.radius

    def to_dict(self):
        return {
            "type": "flat_cone",
            "vertex": list(self.vertex),
            "axis": list(self.axis),
            "opening": self.opening,
            "radius": self.radius,
        }


class TwistedCone(Shape):
    """Folded cone sheet in R^3: three flat pieces, one per coordinate normal.

    Start from the flat cone D = {(s, w) : s >= 0, s^2 + w^2 <= radius^2,
    w^2 <= opening * s^2} in the (x1, x2) plane with vertex at the origin.
    Fold along the line s = c1 so the part beyond stands up vertically, then
    fold the standing wall's flap w > w0 = sqrt(opening)*c1 about its vertical
    crease.  With that particular w0 the three creases meet in one point and
    the piecewise isometry is continuous, hence a non-expansive image of the
    flat cone.  The pieces are orthogonal to e3 (floor, s <= c1), e1 (wall),
    and e2 (side flap); near the vertex the shape coincides with the flat
    cone.  Canonical orientation; translate via ``vertex``.
    """

    def __init__(self, vertex, opening, radius, fold_fraction=1.0 / 3.0):
        self.vertex = np.asarray(vertex, dtype=float)
        self.dim = self.vertex.shape[0]
        if self.dim != 3:
            raise ValueError("twisted cone is three-dimensional")
        self.opening = float(opening)
        self.radius = float(radius)
        self.fold_fraction = float(fold_fraction)
        if self.opening <= 0 or self.radius <= 0:
            raise ValueError("twisted cone needs positive opening and radius")
        if not 0.0 < self.fold_fraction < 1.0:
            raise ValueError("fold_fraction must lie in (0, 1)")
        self.c1 = self.fold_fraction * self.radius
        self.w0 = math.sqrt(self.opening) * self.c1

    def _unfolded(self, points):
        """Map ambient points to (plane residual, s, w) per piece."""
        q = _as_points(points, self.dim) - self.vertex
        pieces = []
        # Floor: x3 = 0, (s, w) = (x1, x2), s <= c1.
        pieces.append((np.abs(q[:, 2]), q[:, 0], q[:, 1], q[:, 0] <= self.c1 + SHEET_TOL))
        # Wall: x1 = c1, s = c1 + x3, w = x2, |w| <= w0, s >= c1.
        s = self.c1 + q[:, 2]
        pieces.append(
            (
                np.abs(q[:, 0] - self.c1),
                s,
                q[:, 1],
                (s >= self.c1 - SHEET_TOL) & (np.abs(q[:, 1]) <= self.w0 + SHEET_TOL),
            )
        )
        # Flap: x2 = w0, s = c1 + x3, w = w0 + (c1 - x1), s >= c1, w >= w0.
        w = self.w0 + (self.c1 - q[:, 0])
        pieces.append(
            (
                np.abs(q[:, 1] - self.w0),
                s,
                w,
                (s >= self.c1 - SHEET_TOL) & (w >= self.w0 - SHEET_TOL),
            )
        )
        return pieces

    def _in_base(self, s, w):
        return (
            (s >= -SHEET_TOL)
            & (s * s + w * w <= self.radius**2 + SHEET_TOL)
            & (w * w <= self.opening * s * s + SHEET_TOL)
        )

    def inside_open(self, points):
        pts = _as_points(points, self.dim)
        return np.zeros(pts.shape[0], dtype=bool)

    def inside_closed(self, points):
        hit = None
        for resid, s, w, extra in self._unfolded(points):
            mask = (resid <= SHEET_TOL) & extra & self._in_base(s, w)
            hit = mask if hit is None else (hit | mask)
        return hit

    def line_closed(self, x, dirs):
        x = np.asarray(x, dtype=float)
        rel = x - self.vertex
        n = dirs.shape[0]

        def affine(coef_d, coef_r):
            """Coefficients (alpha, beta) of a coordinate along the ray."""
            return coef_d, np.full(n, coef_r)

        out = None
        # Each piece: plane crossing * linear/quadratic conditions in t.
        # Coordinates along the ray: x_i(t) = rel_i + t * d_i.
        d1, d2, d3 = dirs[:, 0], dirs[:, 1], dirs[:, 2]
        r1, r2, r3 = rel
        for plane_a, plane_b, s_lin, w_lin, extras in (
            # Floor: |x3| <= tol; s = x1, w = x2; s <= c1.
            (
                d3,
                -r3,
                (d1, r1),
                (d2, r2),
                [("le", (d1, r1), self.c1)],
            ),
            # Wall: |x1 - c1| <= tol; s = c1 + x3, w = x2; s >= c1, |w| <= w0.
            (
                d1,
                self.c1 - r1,
                (d3, self.c1 + r3),
                (d2, r2),
                [
                    ("ge", (d3, self.c1 + r3), self.c1),
                    ("le", (d2, r2), self.w0),
                    ("ge", (d2, r2), -self.w0),
                ],
            ),
            # Flap: |x2 - w0| <= tol; s = c1 + x3, w = w0 + c1 - x1;
            # s >= c1, w >= w0.
            (
                d2,
                self.w0 - r2,
                (d3, self.c1 + r3),
                (-d1, self.w0 + self.c1 - r1),
                [
                    ("ge", (d3, self.c1 + r3), self.c1),
                    ("ge", (-d1, self.w0 + self.c1 - r1), self.w0),
                ],
            ),
        ):
            sa, sb = affine(*s_lin)
            wa, wb = affine(*w_lin)
            parts = [_plane_iv(plane_a, np.full(n, plane_b), SHEET_TOL)]
            # Base-cone conditions on (s, w): s >= 0, s^2 + w^2 <= rho^2,
            # w^2 <= opening * s^2, each quadratic in t.
            parts.append(_halfspace_iv(-sa, sb + SHEET_TOL))
            parts.append(
                _quad_le_iv(
                    sa * sa + wa * wa,
                    2.0 * (sa * sb + wa * wb),
                    sb * sb + wb * wb - self.radius**2 - SHEET_TOL,
                )
            )
            parts.append(
                _quad_le_iv(
                    wa * wa - self.opening * sa * sa,
                    2.0 * (wa * wb - self.opening * sa * sb),
                    wb * wb - self.opening * sb * sb - SHEET_TOL,
                )
            )
            for kind, (aa, ab), bound in extras:
                ab_full = np.full(n, ab)
                if kind == "le":
                    parts.append(_halfspace_iv(aa, bound - ab_full + SHEET_TOL))
                else:
                    parts.append(_halfspace_iv(-aa, ab_full - bound + SHEET_TOL))
            piece = iv_intersect_many(parts)
            out = piece if out is None else iv_union(out, piece)
        return out

    def line_co_closed(self, x, dirs):
        return iv_full(dirs.shape[0])

    def bbox(self):
        # Floor reaches x1 in [0, c1]; the flap walks back to
        # c1 - (w_max - w0) with w_max <= sqrt(opening) * radius.
        w_max = math.sqrt(self.opening) * self.radius
        lo = self.vertex + np.array(
            [min(0.0, self.c1 - (w_max - self.w0)), -self.w0, 0.0]
        )
        hi = self.vertex + np.array([self.c1, self.w0, self.radius - self.c1])
        return lo, hi

    def to_dict(self):
        return {
            "type": "twisted_cone",
            "vertex": list(self.vertex),
            "opening": self.opening,
            "radius": self.radius,
            "fold_fraction": self.fold_fraction,
        }


class PowerCusp(Shape):
    """Solid cusp {0 <= s <= length, |x_perp| <= s^exponent} along an axis.

    ``axis`` is a signed 1-based coordinate index (e.g. +1 means the cusp
    opens along +x1).  With exponent > 1 the tip at the vertex is sharper
    than every cone, the classic thin-complement counterexample geometry.
    Line casting has no closed form for general exponent and uses a
    deterministic sampled chord scan with bisection refinement.
    """

    SCAN_SAMPLES = 257
    BISECT_ITERS = 60

    def __init__(self, vertex, axis, exponent, length):
        self.vertex = np.asarray(vertex, dtype=float)
        self.dim = self.vertex.shape[0]
        self.axis = int(axis)
        if not 1 <= abs(self.axis) <= self.dim:
            raise ValueError("axis must be a signed 1-based coordinate index")
        self.exponent = float(exponent)
        self.length = float(length)
        if self.exponent <= 1.0:
            raise ValueError("cusp exponent must exceed 1")
        if self.length <= 0:
            raise ValueError("cusp length must be positive")

    def _profile(self, points):
        q = _as_points(points, self.dim) - self.vertex
        k = abs(self.axis) - 1
        s = q[:, k] * (1.0 if self.axis > 0 else -1.0)
        perp2 = np.sum(q * q, axis=1) - q[:, k] ** 2
        return s, perp2

    def inside_open(self, points):
        s, perp2 = self._profile(points)
        ok = (s > 0) & (s < self.length)
        with np.errstate(invalid="ignore"):
            ok &= perp2 < np.where(s > 0, s, 0.0) ** (2.0 * self.exponent)
        return ok

    def inside_closed(self, points):
        s, perp2 = self._profile(points)
        ok = (s >= 0) & (s <= self.length)
        with np.errstate(invalid="ignore"):
            ok &= perp2 <= np.where(s > 0, s, 0.0) ** (2.0 * self.exponent)
        return ok

    def _chord_range(self, x, dirs):
        """Parameter window guaranteed to contain the cusp along each ray."""
        center = self.vertex.copy()
        k = abs(self.axis) - 1
        center[k] += (0.5 * self.length) * (1.0 if self.axis > 0 else -1.0)
        # Enclosing radius: axial half-length plus the widest cross-section.
        radius = math.hypot(0.5 * self.length, self.length**self.exponent) * 1.001
        rel = np.asarray(x, dtype=float) - center
        a = np.sum(dirs * dirs, axis=1)
        b = 2.0 * dirs @ rel
        c = rel @ rel - radius**2
        disc = b * b - 4.0 * a * c
        ok = disc > 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-b - sq) / (2.0 * a)
            t2 = (-b + sq) / (2.0 * a)
        return ok, t1, t2

    def line_closed(self, x, dirs):
        x = np.asarray(x, dtype=float)
        n = dirs.shape[0]
        ok, t1, t2 = self._chord_range(x, dirs)
        m = self.SCAN_SAMPLES
        lo_out = []
        hi_out = []
        ts = np.linspace(0.0, 1.0, m)
        # Sampled membership along each candidate chord.
        tgrid = t1[:, None] + (t2 - t1)[:, None] * ts[None, :]
        pts = x[None, None, :] + tgrid[:, :, None] * dirs[:, None, :]
        inside = self.inside_closed(pts.reshape(-1, self.dim)).reshape(n, m)
        inside &= ok[:, None]
        # Convert sample runs to intervals, refining edges by bisection.
        changes = np.diff(inside.astype(np.int8), axis=1)
        max_runs = 4
        lo_arr = np.full((n, max_runs), _INF)
        hi_arr = np.full((n, max_runs), -_INF)
        for row in range(n):
            if not inside[row].any():
                continue
            idx = np.flatnonzero(inside[row])
            starts = [idx[0]]
            ends = []
            gaps = np.flatnonzero(np.diff(idx) > 1)
            for g in gaps:
                ends.append(idx[g])
                starts.append(idx[g + 1])
            ends.append(idx[-1])
            for run, (a_i, b_i) in enumerate(zip(starts, ends)):
                if run >= max_runs:
                    break
                t_lo = self._refine(x, dirs[row], tgrid[row, max(a_i - 1, 0)], tgrid[row, a_i])
                t_hi = self._refine(
                    x, dirs[row], tgrid[row, min(b_i + 1, m - 1)], tgrid[row, b_i]
                )
                lo_arr[row, run] = min(t_lo, t_hi)
                hi_arr[row, run] = max(t_lo, t_hi)
        lo_out, hi_out = lo_arr, hi_arr
        return lo_out, hi_out

    def _refine(self, x, d, t_out, t_in):
        """Bisect between an outside and an inside parameter."""
        if t_out == t_in:
            return t_in
        for _ in range(self.BISECT_ITERS):
            mid = 0.5 * (t_out + t_in)
            if self.inside_closed((x + mid * d).reshape(1, -1))[0]:
                t_in = mid
            else:
                t_out = mid
        return t_in

    def line_co_closed(self, x, dirs):
        lo, hi = self.line_closed(x, dirs)
        # Complement of the union of [lo_j, hi_j]: rays to +-inf plus gaps.
        n = lo.shape[0]
        order = np.argsort(lo, axis=1)
        lo = np.take_along_axis(lo, order, axis=1)
        hi = np.take_along_axis(hi, order, axis=1)
        m = lo.shape[1]
        out_lo = np.full((n, m + 1), _INF)
        out_hi = np.full((n, m + 1), -_INF)
        cur = np.full(n, -_INF)
        for j in range(m):
            seg_lo, seg_hi = lo[:, j], hi[:, j]
            has = seg_lo <= seg_hi
            out_lo[:, j] = np.where(has, cur, _INF)
            out_hi[:, j] = np.where(has, seg_lo, -_INF)
            cur = np.where(has, np.maximum(cur, seg_hi), cur)
        out_lo[:, m] = cur
        out_hi[:, m] = _INF
        return out_lo, out_hi

    def bbox(self):
        k = abs(self.axis) - 1
        width = self.length**self.exponent
        lo = self.vertex - width
        hi = self.vertex + width
        if self.axis > 0:
            lo[k] = self.vertex[k]
            hi[k] = self.vertex[k] + self.length
        else:
            lo[k] = self.vertex[k] - self.length
            hi[k] = self.vertex[k]
        return lo, hi

    def to_dict(self):
        return {
            "type": "power_cusp",
            "vertex": list(self.vertex),
            "axis": self.axis,
            "exponent": self.exponent,
            "length": self.length,
        }


# ---------------------------------------------------------------------------
# Combinators.
# ---------------------------------------------------------------------------


class Union(Shape):
    def __init__(self, parts):
        self.parts = list(parts)
        if not self.parts:
            raise ValueError("union needs at least one part")
        self.dim = self.parts[0].dim
        if any(p.dim != self.dim for p in self.parts):
            raise ValueError("union parts must share a dimension")

    def inside_open(self, points):
        out = self.parts[0].inside_open(points)
        for p in self.parts[1:]:
            out = out | p.inside_open(points)
        return out

    def inside_closed(self, points):
        out = self.parts[0].inside_closed(points)
        for p in self.parts[1:]:
            out = out | p.inside_closed(points)
        return out

    def line_closed(self, x, dirs):
        out = self.parts[0].line_closed(x, dirs)
        for p in self.parts[1:]:
            out = iv_union(out, p.line_closed(x, dirs))
        return out

    def line_co_closed(self, x, dirs):
        out = self.parts[0].line_co_closed(x, dirs)
        for p in self.parts[1:]:
            out = iv_intersect(out, p.line_co_closed(x, dirs))
        return out

    def bbox(self):
        boxes = [p.bbox() for p in self.parts]
        if any(b is None for b in boxes):
            return None
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        return lo, hi

    def to_dict(self):
        return {"type": "union", "parts": [p.to_dict() for p in self.parts]}


class Intersection(Shape):
    def __init__(self, parts):
        self.parts = list(parts)
        if not self.parts:
            raise ValueError("intersection needs at least one part")
        self.dim = self.parts[0].dim
        if any(p.dim != self.dim for p in self.parts):
            raise ValueError("intersection parts must share a dimension")

    def inside_open(self, points):
        out = self.parts[0].inside_open(points)
        for p in self.parts[1:]:
            out = out & p.inside_open(points)
        return out

    def inside_closed(self, points):
        out = self.parts[0].inside_closed(points)
        for p in self.parts[1:]:
            out = out & p.inside_closed(points)
        return out

    def line_closed(self, x, dirs):
        out = self.parts[0].line_closed(x, dirs)
        for p in self.parts[1:]:
            out = iv_intersect(out, p.line_closed(x, dirs))
        return out

    def line_co_closed(self, x, dirs):
        out = self.parts[0].line_co_closed(x, dirs)
        for p in self.parts[1:]:
            out = iv_union(out, p.line_co_closed(x, dirs))
        return out

    def bbox(self):
        lo = None
        hi = None
        for p in self.parts:
            box = p.bbox()
            if box is None:
                continue
            lo = box[0] if lo is None else np.maximum(lo, box[0])
            hi = box[1] if hi is None else np.minimum(hi, box[1])
        if lo is None:
            return None
        return lo, hi

    def to_dict(self):
        return {"type": "intersection", "parts": [p.to_dict() for p in self.parts]}


class Complement(Shape):
    def __init__(self, part):
        self.part = part
        self.dim = part.dim

    def inside_open(self, points):
        return ~self.part.inside_closed(points)

    def inside_closed(self, points):
        return ~self.part.inside_open(points)

    def line_closed(self, x, dirs):
        return self.part.line_co_closed(x, dirs)

    def line_co_closed(self, x, dirs):
        return self.part.line_closed(x, dirs)

    def bbox(self):
        return None

    def to_dict(self):
        return {"type": "complement", "part": self.part.to_dict()}


class Difference(Shape):
    """Set difference a minus b (open: strictly inside a, outside closure b)."""

    def __init__(self, a, b):
        if a.dim != b.dim:
            raise ValueError("difference parts must share a dimension")
        self.a = a
        self.b = b
        self.dim = a.dim

    def inside_open(self, points):
        return self.a.inside_open(points) & ~self.b.inside_closed(points)

    def inside_closed(self, points):
        return self.a.inside_closed(points) & ~self.b.inside_open(points)

    def line_closed(self, x, dirs):
        return iv_intersect(self.a.line_closed(x, dirs), self.b.line_co_closed(x, dirs))

    def line_co_closed(self, x, dirs):
        return iv_union(self.a.line_co_closed(x, dirs), self.b.line_closed(x, dirs))

    def bbox(self):
        return self.a.bbox()

    def to_dict(self):
        return {"type": "difference", "a": self.a.to_dict(), "b": self.b.to_dict()}


# ---------------------------------------------------------------------------
# Serialization.
# ---------------------------------------------------------------------------


def shape_from_dict(data):
    """Rebuild a shape from its ``to_dict`` representation."""
    kind = data["type"]
    if kind == "ball":
        return Ball(data["center"], data["radius"])
    if kind == "box":
        return Box(data["lo"], data["hi"])
    if kind == "halfspace":
        return Halfspace(data["normal"], data["offset"])
    if kind == "solid_cone":
        return SolidCone(data["vertex"], data["axis"], data["opening"], data["radius"])
    if kind == "flat_cone":
        return FlatCone(data["vertex"], data["axis"], data["opening"], data["radius"])
    if kind == "twisted_cone":
        return TwistedCone(
            data["vertex"],
            data["opening"],
            data["radius"],
            data.get("fold_fraction", 1.0 / 3.0),
        )
    if kind == "power_cusp":
        return PowerCusp(data["vertex"], data["axis"], data["exponent"], data["length"])
    if kind == "union":
        return Union([shape_from_dict(p) for p in data["parts"]])
    if kind == "intersection":
        return Intersection([shape_from_dict(p) for p in data["parts"]])
    if kind == "complement":
        return Complement(shape_from_dict(data["part"]))
    if kind == "difference":
        return Difference(shape_from_dict(data["a"]), shape_from_dict(data["b"]))
    raise ValueError(f"unknown shape type: {kind!r}")
