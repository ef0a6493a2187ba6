"""Polar bodies, the Santalo point and the volume product."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CenterNotInterior, NonConvergence
from .polytope import Polytope, centroid, ensure_valid, volume

log = logging.getLogger(__name__)

MARGIN_RTOL = 1e-12
DEFAULT_TOL = 1e-8
MAX_ITER = 10_000
PROBES = 100

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SantaloResult:
    point: np.ndarray
    polar_volume: float
    volume: float
    product: float
    residual: float
    iterations: int


def _margins(P: Polytope, z: np.ndarray) -> np.ndarray:
    return P.offsets - P.normals @ z


def is_interior(P: Polytope, z) -> bool:
    return bool(_margins(P, np.asarray(z, dtype=float)).min() > MARGIN_RTOL * P.diameter)


def polar(P: Polytope, z) -> Polytope:
    """Polar body of ``P`` about the interior point ``z``.

    Facet ``k`` of ``P`` becomes vertex ``k`` of the polar, vertex ``i``
    becomes facet ``i`` and edge ``j`` keeps its label.
    """
    z = np.asarray(z, dtype=float)
    margins = _margins(P, z)
    if margins.min() <= MARGIN_RTOL * P.diameter:
        bad = [k for k, m in zip(P.lattice.facet_labels, margins) if m <= MARGIN_RTOL * P.diameter]
        raise CenterNotInterior(f"center is not strictly inside facets {bad}")
    dual_pts = z + P.normals / margins[:, None]

    cycles = {}
    planes = {}
    for i in P.lattice.vertex_labels:
        ring = P.vertex_cycles[i]
        d = P.vertex(i) - z
        r = np.linalg.norm(d)
        n = d / r
        pts = dual_pts[[P.facet_row[k] for k in ring]]
        # orientation of the ring is fixed by comparison with the outer normal
        q = np.roll(pts, -1, axis=0)
        newell = np.array([
            ((pts[:, 1] - q[:, 1]) * (pts[:, 2] + q[:, 2])).sum(),
            ((pts[:, 2] - q[:, 2]) * (pts[:, 0] + q[:, 0])).sum(),
            ((pts[:, 0] - q[:, 0]) * (pts[:, 1] + q[:, 1])).sum(),
        ])
        if newell @ n < 0:
            ring = ring[:1] + tuple(reversed(ring[1:]))
        cycles[i] = ring
        planes[i] = (n, float(n @ z + 1.0 / r))

    edge_labels = {}
    for j, ks in P.lattice.phi2.items():
        edge_labels[frozenset(ks)] = j
    return Polytope.from_cycles(P.lattice.facet_labels, dual_pts, cycles, edge_labels=edge_labels, planes=planes)


def _moments(P: Polytope, z: np.ndarray):
    return _kernels.polar_moments(P.normals, P.offsets, z, P.dual_triangles)


def polar_volume(P: Polytope, z) -> float:
    z = np.asarray(z, dtype=float)
    if not is_interior(P, z):
        raise CenterNotInterior("center is not strictly inside the polytope")
    return _moments(P, z)[0]


def polar_centroid(P: Polytope, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    vol, m1, _ = _moments(P, z)
    return z + m1 / vol


def _objective(P: Polytope, z: np.ndarray) -> float:
    if not is_interior(P, z):
        return np.inf
    return _moments(P, z)[0]


def _golden_axis(P: Polytope, z: np.ndarray, axis: np.ndarray, evals: int = 80) -> np.ndarray:
    # feasible segment along the axis, kept slightly away from the boundary
    den = P.normals @ axis
    m = _margins(P, z)
    with np.errstate(divide="ignore"):
        steps = np.where(den != 0, m / np.where(den != 0, den, 1.0), np.inf)
    hi = steps[den > 0].min() if (den > 0).any() else 1.0
    lo = steps[den < 0].max() if (den < 0).any() else -1.0
    a, b = 0.999 * lo, 0.999 * hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = _objective(P, z + c * axis), _objective(P, z + d * axis)
    for _ in range(evals):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _objective(P, z + c * axis)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _objective(P, z + d * axis)
    t = 0.5 * (a + b)
    cand = z + t * axis
    return cand if _objective(P, cand) <= _objective(P, z) else z


def santalo_point(P: Polytope, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER,
                  probes: int = PROBES, check: bool = True) -> SantaloResult:
    """Minimize ``z -> |P^z|`` over the interior of ``P``.

    Damped Newton iteration on the polar volume.  The gradient is
    ``4 * int_{P^z - z} y dy`` and the Hessian ``20 * int_{P^z - z} y y^T dy``;
    the step is halved until the objective decreases.  Convergence is
    certified by ``|centroid(P^z) - z| <= tol * diam(P)``.  If the Newton
    iteration stalls, cyclic golden-section line searches along the
    coordinate axes take over.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if check:
        ensure_valid(P)
    diam = P.diameter
    vol_P = volume(P, check=False)
    z = centroid(P)
    if not is_interior(P, z):
        z = P.barycenter.copy()
    f, m1, m2 = _moments(P, z)
    residual = float(np.linalg.norm(m1) / f)
    it = 0
    stalled = False
    while residual > tol * diam and it < max_iter:
        it += 1
        if not stalled:
            try:
                step = -np.linalg.solve(20.0 * m2, 4.0 * m1)
            except np.linalg.LinAlgError:
                step = -m1 / f
            lam = 1.0
            while lam > 1e-14:
                cand = z + lam * step
                fc = _objective(P, cand)
                if fc <= f:
                    break
                lam *= 0.5
            else:
                stalled = True
                log.debug("newton stalled at iteration %d, switching to golden section", it)
                continue
            z = cand
        else:
            for axis in np.eye(3):
                z = _golden_axis(P, z, axis)
        f, m1, m2 = _moments(P, z)
        new_residual = float(np.linalg.norm(m1) / f)
        if not stalled and new_residual >= residual and lam < 1.0 and it > 50:
            stalled = True
        residual = new_residual

    if residual > tol * diam:
        raise NonConvergence(f"residual {residual:.3g} > {tol * diam:.3g} after {it} iterations")

    if probes:
        rng = np.random.default_rng(0)
        weights = rng.dirichlet(np.ones(P.V), size=probes)
        mix = rng.uniform(0.0, 1.0, size=(probes, 1))
        probe_pts = (1 - mix) * z + mix * (weights @ P.points)
        for zp in probe_pts:
            fp = _objective(P, zp)
            if fp < f * (1 - 1e-12):
                raise NonConvergence(f"probe {zp} beats the solver: {fp} < {f}")

    return SantaloResult(point=z, polar_volume=float(f), volume=vol_P, product=float(vol_P * f),
                         residual=residual, iterations=it)


def volume_product(P: Polytope, tol: float = DEFAULT_TOL) -> float:
    return santalo_point(P, tol).product


def santalo_polar(P: Polytope, tol: float = DEFAULT_TOL) -> Polytope:
    return polar(P, santalo_point(P, tol).point)


def product_monotonicity_check(P: Polytope, rtol: float = 1e-7) -> bool:
    """True iff the Santalo polar of ``P`` has no larger volume product than ``P``."""
    res = santalo_point(P)
    Q = polar(P, res.point)
    return volume_product(Q) <= res.product * (1.0 + rtol)


def product_report(P: Polytope, res: SantaloResult) -> dict:
    rows = P.vertex_row
    return {
        "vertices": P.points.tolist(),
        "facets": [[rows[i] for i in P.cycles[k]] for k in P.lattice.facet_labels],
        "santalo_point": res.point.tolist(),
        "polar_volume": res.polar_volume,
        "volume": res.volume,
        "product": res.product,
        "residual": res.residual,
        "iterations": res.iterations,
    }
