"""Directional and density measurements of the domain complement near a point.

Two ways to quantify how much of a neighborhood the complement occupies:

* volumetric density sigma = |complement inter ball| / |ball| (see
  ``lattice.density``), and
* the solid angle of directions xi for which the full line x + t*xi (both
  senses of t) meets the complement cap, taken at the worst probe point.

The solid-angle estimate is a seeded Monte Carlo: directions uniform on the
unit sphere, probe points uniform over the domain side of the probe ball, and
for each probe the fraction of direction lines hitting the cap, scaled by the
sphere measure N*V_N.  The infimum over probes is reported with the binomial
standard error at the minimizing probe.  Ray casting is exact interval
arithmetic against the analytic shape, so zero-measure sheets (slits, folded
cones) count as hits even though no sampled point would land on them.

A combined lower bound and a logarithmic density criterion round the module
out; both are plain formula evaluations recorded per radius.
"""

import math
import warnings

import numpy as np

from .lattice import density, unit_ball_volume
from .shapes import Ball, Complement, Intersection, iv_nonempty

__all__ = [
    "solid_angle_lower_bound",
    "sigma_hat_bounds",
    "criterion_density",
    "sphere_measure",
]


def sphere_measure(dim):
    """Surface measure of the unit sphere in R^dim (= dim * V_dim)."""
    return dim * unit_ball_volume(dim)


def _unit_directions(rng, count, dim):
    vecs = rng.standard_normal((count, dim))
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    # Resample the (astronomically unlikely) zero rows deterministically.
    bad = norms[:, 0] < 1e-12
    while bad.any():
        vecs[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(vecs, axis=1, keepdims=True)
        bad = norms[:, 0] < 1e-12
    return vecs / norms


def solid_angle_lower_bound(cap, n_directions=4096, n_probes=512, seed=0):
    """Worst-probe solid angle of complement-hitting lines, Monte Carlo.

    Returns a dict with the infimum estimate (sphere-measure units), the
    binomial standard error at the minimizing probe, and bookkeeping counts.
    An empty cap scores 0; a cap that fills its probe ball entirely scores
    the full sphere measure (every line from every interior point hits).
    """
    dim = cap.grid.dim
    full = sphere_measure(dim)
    if cap.is_empty():
        return {
            "estimate": 0.0,
            "standard_error": 0.0,
            "directions": int(n_directions),
            "probes": 0,
            "note": "empty cap",
        }
    rng = np.random.default_rng(seed)
    dirs = _unit_directions(rng, int(n_directions), dim)
    target = Intersection(
        [Ball(cap.center, cap.radius), Complement(cap.shape)]
    )
    # Probe points: uniform over ball(center, radius) minus the complement,
    # i.e. the domain side of the probe ball, by rejection.
    probes = []
    attempts = 0
    max_attempts = 200
    batch = max(64, int(n_probes))
    while len(probes) < n_probes and attempts < max_attempts:
        pts = rng.standard_normal((batch, dim))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        radii = cap.radius * rng.random(batch) ** (1.0 / dim)
        pts = cap.center + pts * radii[:, None]
        keep = cap.shape.inside_open(pts)
        for p in pts[keep]:
            probes.append(p)
            if len(probes) >= n_probes:
                break
        attempts += 1
    if not probes:
        return {
            "estimate": full,
            "standard_error": 0.0,
            "directions": int(n_directions),
            "probes": 0,
            "note": "cap fills the probe ball; every line hits",
        }
    best = None
    best_p = None
    for x in probes:
        hits = iv_nonempty(target.line_closed(x, dirs))
        frac = float(np.mean(hits))
        if best is None or frac < best:
            best = frac
            best_p = x
    se = full * math.sqrt(max(best * (1.0 - best), 0.0) / n_directions)
    return {
        "estimate": full * best,
        "standard_error": se,
        "directions": int(n_directions),
        "probes": len(probes),
        "worst_probe": [float(v) for v in best_p],
        "note": "",
    }


def sigma_hat_bounds(cap, angle_estimate=None):
    """Combined lower bound from density and solid angle.

    The density branch contributes sigma * N * V_N / 2^N (a cap of volume
    fraction sigma subtends at least that much angle from somewhere); the
    direction branch contributes the measured solid angle when available.
    """
    dim = cap.grid.dim
    sigma = density(cap)
    from_density = sigma * sphere_measure(dim) / (2.0**dim)
    if angle_estimate is None:
        return from_density
    return max(from_density, float(angle_estimate))


def criterion_density(sigmas, lam, radii, rho_star=math.exp(-1.0)):
    """Logarithmic thickness test: sigma(r) >= lam / log(1/r) per radius.

    Radii at or above exp(-1) make the right side blow up or flip sign and
    are skipped with a warning.  The verdict is the conjunction over all
    evaluated radii strictly below ``rho_star``.
    """
    if lam <= 0:
        raise ValueError("criterion threshold lam must be positive")
    sigmas = [float(s) for s in sigmas]
    radii = [float(r) for r in radii]
    if len(sigmas) != len(radii):
        raise ValueError("need one density value per radius")
    rows = []
    verdict = True
    evaluated = 0
    for sigma, r in zip(sigmas, radii):
        if r <= 0:
            raise ValueError("radii must be positive")
        if r >= math.exp(-1.0):
            warnings.warn(
                f"criterion_density: radius {r} >= exp(-1) skipped", stacklevel=2
            )
            rows.append({"radius": r, "sigma": sigma, "threshold": None,
                         "holds": None, "skipped": True})
            continue
        threshold = lam / math.log(1.0 / r)
        holds = sigma >= threshold
        rows.append({"radius": r, "sigma": sigma, "threshold": threshold,
                     "holds": bool(holds), "skipped": False})
        if r < rho_star:
            evaluated += 1
            verdict = verdict and holds
    return {
        "lam": float(lam),
        "rho_star": float(rho_star),
        "per_radius": rows,
        "evaluated": evaluated,
        "verdict": bool(verdict) if evaluated else None,
    }
