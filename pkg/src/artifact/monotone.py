"""Monotone vector fields of degenerate elliptic type and their discrete energy.

The continuous object is a field A : R^N -> R^N with A(0) = 0, strict
monotonicity (A(p) - A(q)) . (p - q) > 0, and t-growth: A(p) . p >= a |p|^t
and |A(p)| <= a^{-1} |p|^{t-1} for |p| beyond a threshold p0.  Two built-in
kinds with exact potentials:

* ``p_laplace``:    A(p) = |p|^{t-2} p,           W(p) = |p|^t / t,
* ``regularized``:  A(p) = (1+|p|^2)^{(t-2)/2} p, W(p) = (1+|p|^2)^{t/2} / t,

plus ``custom`` (a user callable, optionally with a potential).  The built-in
kinds are isotropic (A is a scalar profile times p), odd-symmetric, and the
p_laplace kind is (t-1)-homogeneous.

Discrete energy on a labeled grid: per lattice cell, average the integrand
over the 2^N cell corners, where the gradient at a corner collects the N edge
differences of the edges meeting that corner,

    E(u) = (h^N / 2^N) * sum_cells sum_corners W(G_corner).

Only active cells (those owning an interior node) contribute.  With this
quadrature the stationarity condition at a node is a positively weighted mean
of its 2N face neighbors for every t, which is what gives the solver its
exact discrete comparison principle; at t = 2 the scheme reduces to the
classical 5-/7-point Laplacian.

``weak_residual`` assembles r_i = dE/du_i directly from A (so it also works
for custom fields without a potential); for potential kinds it is exactly the
gradient of ``energy``, and the tests pin that equality by finite differences.
"""

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .domain.lattice import EXTERIOR, INTERIOR

__all__ = [
    "OperatorSpec",
    "Field",
    "apply_A",
    "potential",
    "check_assumptions",
    "energy",
    "weak_residual",
    "reflect",
]


@dataclass
class OperatorSpec:
    """Parameters of a monotone field: kind, exponent t, ellipticity window.

    ``a`` and ``p0`` describe the growth frame (coercivity constant and the
    magnitude beyond which it is enforced); ``eps_floor`` regularizes the
    singular profile |p|^{t-2} near p = 0 when t < 2.  Custom kinds supply
    ``A_fn`` (and ``W_fn`` when they derive from a potential).
    """

    kind: str = "p_laplace"
    t: float = 2.0
    a: float = 1.0
    p0: float = 0.0
    odd_symmetric: bool = True
    homogeneous: bool = dc_field(default=None)
    eps_floor: float = 1e-12
    A_fn: object = None
    W_fn: object = None

    def __post_init__(self):
        if self.t <= 1.0:
            raise ValueError("exponent t must exceed 1")
        if self.a <= 0.0:
            raise ValueError("ellipticity constant a must be positive")
        if self.p0 < 0.0:
            raise ValueError("threshold p0 must be nonnegative")
        if self.kind not in ("p_laplace", "regularized", "custom"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "custom" and self.A_fn is None:
            raise ValueError("custom operator needs A_fn")
        if self.homogeneous is None:
            self.homogeneous = self.kind == "p_laplace"

    def has_potential(self):
        return self.kind in ("p_laplace", "regularized") or self.W_fn is not None

    def to_dict(self):
        return {
            "kind": self.kind,
            "t": self.t,
            "a": self.a,
            "p0": self.p0,
            "odd_symmetric": self.odd_symmetric,
            "homogeneous": self.homogeneous,
            "eps_floor": self.eps_floor,
        }


def profile(spec, mag):
    """Scalar profile phi with A(p) = phi(|p|) * p, for isotropic kinds."""
    mag = np.asarray(mag, dtype=float)
    if spec.kind == "p_laplace":
        if spec.t >= 2.0:
            return mag ** (spec.t - 2.0)
        return np.maximum(mag, spec.eps_floor) ** (spec.t - 2.0)
    if spec.kind == "regularized":
        return (1.0 + mag * mag) ** ((spec.t - 2.0) / 2.0)
    raise ValueError("custom operators have no scalar profile")


def integrand(spec, mag):
    """Potential W as a function of gradient magnitude."""
    mag = np.asarray(mag, dtype=float)
    if spec.kind == "p_laplace":
        return mag**spec.t / spec.t
    if spec.kind == "regularized":
        return (1.0 + mag * mag) ** (spec.t / 2.0) / spec.t
    raise ValueError("energy undefined; use weak_residual")


def apply_A(spec, p):
    """Evaluate the vector field on gradients of shape (..., N)."""
    p = np.asarray(p, dtype=float)
    if spec.kind == "custom":
        return np.asarray(spec.A_fn(p), dtype=float)
    mag = np.sqrt(np.sum(p * p, axis=-1))
    return profile(spec, mag)[..., None] * p


def potential(spec, p):
    """Evaluate the potential W on gradients of shape (..., N)."""
    p = np.asarray(p, dtype=float)
    if spec.kind == "custom":
        if spec.W_fn is None:
            raise ValueError("energy undefined; use weak_residual")
        return np.asarray(spec.W_fn(p), dtype=float)
    mag = np.sqrt(np.sum(p * p, axis=-1))
    return integrand(spec, mag)


def reflect(spec):
    """The reflected field B(p) = -A(-p) (an involution).

    For odd-symmetric kinds the reflection is the field itself, so an
    equivalent spec is returned; custom fields get wrapped callables.
    """
    if spec.kind != "custom":
        return replace(spec)
    a_fn = spec.A_fn
    w_fn = spec.W_fn
    reflected_w = None if w_fn is None else (lambda p: w_fn(-np.asarray(p)))
    return replace(
        spec,
        A_fn=lambda p: -a_fn(-np.asarray(p)),
        W_fn=reflected_w,
    )


# ---------------------------------------------------------------------------
# Structural checks.
# ---------------------------------------------------------------------------


def check_assumptions(spec, dim=2, n_samples=2048, seed=0):
    """Sample-based audit of the structure assumptions.

    Draws magnitude/direction samples with |p| log-uniform in
    [max(p0, 1e-4), 1e3] and reports zero-at-zero, strict monotonicity on
    sample pairs, coercivity A(p).p >= a|p|^t, and growth
    |A(p)| <= |p|^{t-1}/a, each with a 1e-9 relative slack.
    """
    rng = np.random.default_rng(seed)
    lo = max(spec.p0, 1e-4)
    mags = np.exp(rng.uniform(math.log(lo), math.log(1e3), size=(2, n_samples)))
    dirs = rng.standard_normal((2, n_samples, dim))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    p = mags[0, :, None] * dirs[0]
    q = mags[1, :, None] * dirs[1]
    rel = 1e-9

    report = {"kind": spec.kind, "t": spec.t, "n_samples": int(n_samples), "checks": {}}

    a0 = apply_A(spec, np.zeros((1, dim)))
    zero_ok = bool(np.all(np.abs(a0) <= 1e-300 + rel))
    report["checks"]["zero_at_zero"] = {
        "passed": zero_ok,
        "max_abs": float(np.max(np.abs(a0))),
    }

    ap = apply_A(spec, p)
    aq = apply_A(spec, q)
    inner = np.sum((ap - aq) * (p - q), axis=-1)
    scale = np.linalg.norm(ap - aq, axis=-1) * np.linalg.norm(p - q, axis=-1) + 1e-300
    distinct = np.linalg.norm(p - q, axis=-1) > 1e-12
    mono_viol = int(np.sum((inner < -rel * scale) & distinct))
    strict_viol = int(np.sum((inner <= 0) & (scale > 1e-12) & distinct))
    report["checks"]["monotonicity"] = {
        "passed": mono_viol == 0 and strict_viol == 0,
        "violations": mono_viol,
        "nonstrict": strict_viol,
        "min_normalized": float(np.min(inner / scale)),
    }

    coercive = np.sum(ap * p, axis=-1)
    need = spec.a * mags[0] ** spec.t
    in_frame = mags[0] >= spec.p0
    co_viol = int(np.sum(in_frame & (coercive < need * (1.0 - rel))))
    report["checks"]["coercivity"] = {
        "passed": co_viol == 0,
        "violations": co_viol,
        "min_ratio": float(np.min(coercive[in_frame] / need[in_frame]))
        if in_frame.any()
        else None,
    }

    growth = np.linalg.norm(ap, axis=-1)
    cap = mags[0] ** (spec.t - 1.0) / spec.a
    gr_viol = int(np.sum(in_frame & (growth > cap * (1.0 + rel))))
    report["checks"]["growth"] = {
        "passed": gr_viol == 0,
        "violations": gr_viol,
        "max_ratio": float(np.max(growth[in_frame] / cap[in_frame]))
        if in_frame.any()
        else None,
    }

    report["passed"] = all(c["passed"] for c in report["checks"].values())
    return report


# ---------------------------------------------------------------------------
# Fields on grids and the discrete energy.
# ---------------------------------------------------------------------------


class Field:
    """One real value per grid node (values at exterior nodes are inert)."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.dims:
            raise ValueError(f"field shape {values.shape} != grid dims {grid.dims}")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.dims))

    @classmethod
    def from_function(cls, grid, fn):
        vals = np.asarray(fn(grid.points()), dtype=float).reshape(grid.dims)
        return cls(grid, vals)

    def copy(self):
        return Field(self.grid, self.values.copy())

    def validate_finite(self):
        live = self.grid.labels != EXTERIOR
        if not np.all(np.isfinite(self.values[live])):
            raise ValueError("field has non-finite values at live nodes")

    def interior_values(self):
        return self.values[self.grid.labels == INTERIOR]


def edge_differences(values, h):
    """Forward differences along each axis: D[k] = (shift_k(u) - u) / h."""
    diffs = []
    for k in range(values.ndim):
        lead = tuple(
            slice(1, None) if j == k else slice(None) for j in range(values.ndim)
        )
        lag = tuple(
            slice(0, -1) if j == k else slice(None) for j in range(values.ndim)
        )
        diffs.append((values[lead] - values[lag]) / h)
    return diffs


def _corner_slices(dims, corner):
    """Slices extracting, per axis, the cell-indexed view of D for a corner."""
    out = []
    ndim = len(dims)
    for d in range(ndim):
        sl = []
        for k in range(ndim):
            if k == d:
                sl.append(slice(0, dims[k] - 1))
            else:
                sl.append(slice(corner[k], corner[k] + dims[k] - 1))
        out.append(tuple(sl))
    return out


def corner_gradients(values, h, dims):
    """Iterate (corner, [component arrays over cells]) for all 2^N corners."""
    diffs = edge_differences(values, h)
    ndim = len(dims)
    for corner in np.ndindex(*([2] * ndim)):
        slices = _corner_slices(dims, corner)
        yield corner, [diffs[d][slices[d]] for d in range(ndim)]


def energy(spec, fld):
    """Discrete energy over active cells (corner-quadrature average)."""
    if not spec.has_potential():
        raise ValueError("energy undefined; use weak_residual")
    grid = fld.grid
    active = grid.active_cell_mask()
    h = grid.h
    ndim = grid.dim
    total = 0.0
    for _, comps in corner_gradients(fld.values, h, grid.dims):
        if spec.kind == "custom":
            g = np.stack(comps, axis=-1)
            w = potential(spec, g)
        else:
            mag = np.sqrt(sum(c * c for c in comps))
            w = integrand(spec, mag)
        total += float(np.sum(w[active]))
    return total * h**ndim / 2.0**ndim


def weak_residual(spec, fld):
    """Gradient of the energy, r_i = dE/du_i, assembled directly from A.

    Returns a field that is zero at boundary and exterior nodes (those carry
    data, not unknowns).  Works for any kind, potential or not.
    """
    grid = fld.grid
    active = grid.active_cell_mask()
    h = grid.h
    ndim = grid.dim
    res = np.zeros(grid.dims)
    coeff = h ** (ndim - 1) / 2.0**ndim
    for corner, comps in corner_gradients(fld.values, h, grid.dims):
        g = np.stack(comps, axis=-1)
        a_val = apply_A(spec, g)
        for d in range(ndim):
            contrib = np.where(active, a_val[..., d], 0.0) * coeff
            head = []
            tail = []
            for k in range(ndim):
                if k == d:
                    head.append(slice(1, grid.dims[k]))
                    tail.append(slice(0, grid.dims[k] - 1))
                else:
                    head.append(slice(corner[k], corner[k] + grid.dims[k] - 1))
                    tail.append(head[-1])
            res[tuple(head)] += contrib
            res[tuple(tail)] -= contrib
    res[grid.labels != INTERIOR] = 0.0
    return Field(grid, res)
