"""Shadow systems ``P_t = conv{x_i + t alpha_i theta}``.

Covers the deformation itself, detection of the parameter range on which the
labeled face lattice persists, sampled sweeps of volume and Santalo polar
volume, and checks of the laws those samples obey (affine volume, convex
reciprocal polar volume, constant product at an interior minimum).
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels
from .errors import NotAdmissible, ParallelFacet, PreconditionUnmet
from .polar import santalo_point
from .polytope import Polytope, _plane_basis, hull, lattice_equal, volume
from .speeds import PARALLEL_TOL, SpeedAssignment, admissibility_violations

PERSIST_SAMPLES = 64
AFFINE_SAMPLES = 16
CONVEXITY_SAMPLES = 9


@dataclass(frozen=True)
class ShadowSystem:
    base: Polytope
    speed: SpeedAssignment
    c: float


@dataclass
class SweepTrace:
    ts: np.ndarray
    volumes: np.ndarray
    polar_volumes: np.ndarray
    products: np.ndarray
    lattice_ok: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "volume", "polar_volume", "product", "lattice_ok"])
        for t, v, g, p, ok in zip(self.ts, self.volumes, self.polar_volumes, self.products, self.lattice_ok):
            w.writerow([f"{t:.17g}", f"{v:.17g}", f"{g:.17g}", f"{p:.17g}", "true" if ok else "false"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepTrace":
        rows = list(csv.DictReader(io.StringIO(text)))
        col = lambda name: np.array([float(r[name]) for r in rows])  # noqa: E731
        return cls(col("t"), col("volume"), col("polar_volume"), col("product"),
                   np.array([r["lattice_ok"] == "true" for r in rows]))


def moved_points(P: Polytope, s: SpeedAssignment, t: float) -> np.ndarray:
    return P.points + t * np.outer(s.alpha, s.theta)


def _inherit_labels(Q: Polytope, P: Polytope, row_labels) -> Polytope:
    """Relabel a hull of moved points so that unchanged faces keep P's labels."""
    vlab = {r: int(row_labels[r]) for r in Q.lattice.vertex_labels}
    cycles_by_set = {frozenset(c): k for k, c in P.cycles.items()}
    edges_by_pair = {ends: j for j, ends in P.lattice.edge_vertices().items()}
    next_f = max(P.lattice.facet_labels, default=-1) + 1
    cycles = {}
    for k in Q.lattice.facet_labels:
        c = tuple(vlab[i] for i in Q.cycles[k])
        lab = cycles_by_set.get(frozenset(c))
        if lab is None or lab in cycles:
            lab = next_f
            next_f += 1
        cycles[lab] = c
    next_e = max(P.lattice.edge_labels, default=-1) + 1
    edge_labels = {}
    for ends in Q.lattice.edge_vertices().values():
        pair = frozenset(vlab[i] for i in ends)
        lab = edges_by_pair.get(pair)
        if lab is None:
            lab = next_e
            next_e += 1
        edge_labels[pair] = lab
    labels = [vlab[i] for i in Q.lattice.vertex_labels]
    return Polytope.from_cycles(labels, Q.points, cycles, edge_labels=edge_labels)


def deform(P: Polytope, s: SpeedAssignment, t: float) -> Polytope:
    """Hull of the moved vertices; faces that survive keep their labels."""
    pts = moved_points(P, s, t)
    Q = hull(pts)
    return _inherit_labels(Q, P, P.lattice.vertex_labels)


def moved(P: Polytope, s: SpeedAssignment, t: float) -> Polytope:
    """Moved polytope with P's lattice; only meaningful inside the persistence interval."""
    return P.with_points(moved_points(P, s, t))


def _certified(P: Polytope, s: SpeedAssignment, ts: np.ndarray) -> bool:
    ptr, idx = P.facet_csr
    tol = P.plane_tol
    for t in ts:
        if not _kernels.facet_certificate(moved_points(P, s, t), ptr, idx, tol):
            return False
    return True


def _samples(c: float, n: int = PERSIST_SAMPLES) -> np.ndarray:
    return np.linspace(-c, c, n)


def _bracket(P: Polytope, s: SpeedAssignment, cap: float, rtol: float, samples: int,
             signs: Tuple[int, ...]) -> Tuple[float, Optional[float]]:
    if cap <= 0:
        raise ValueError("cap must be positive")

    def grid(c):
        if len(signs) == 2:
            return _samples(c, samples)
        return signs[0] * np.linspace(0.0, c, samples)

    def same(t):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return lattice_equal(deform(P, s, t), P)

    def ok(c):
        return _certified(P, s, grid(c)) and all(same(sg * c) for sg in signs)

    lo, hi = (cap, None) if ok(cap) else (0.0, cap)
    for _ in range(8):
        if hi is not None:
            while hi - lo > rtol * cap:
                mid = 0.5 * (lo + hi)
                if ok(mid):
                    lo = mid
                else:
                    hi = mid
        if lo <= 0:
            break
        fails = [abs(t) for t in grid(lo) if not same(t)]
        if not fails:
            break
        hi, lo = min(fails), 0.0
    return lo, hi


def persistence_bracket(P: Polytope, s: SpeedAssignment, cap: float, rtol: float = 1e-6,
                        samples: int = PERSIST_SAMPLES, sign: int = 0) -> Tuple[float, Optional[float]]:
    """(c, c_fail): the lattice persists on [-c, c] and breaks at some |t| <= c_fail.

    ``c_fail`` is None when the full cap is certified.  Bisection runs on the
    facet-plane certificate over ``samples`` points of [-c, c] together with
    hull recomputation at the two ends; the returned interval is then
    confirmed by recomputing the hull at every sample.  ``sign=+1`` or ``-1``
    brackets the one-sided range [0, c] or [-c, 0] instead.
    """
    bad = admissibility_violations(P, s)
    if bad:
        raise NotAdmissible(bad)
    signs = (-1, 1) if sign == 0 else (int(np.sign(sign)),)
    return _bracket(P, s, cap, rtol, samples, signs)


def persistence_interval(P: Polytope, s: SpeedAssignment, cap: float = 0.5, rtol: float = 1e-6) -> float:
    """Largest c <= cap (found by bisection) on which the labeled lattice persists."""
    return persistence_bracket(P, s, cap, rtol)[0]


def sweep(P: Polytope, s: SpeedAssignment, c: float, n: int = CONVEXITY_SAMPLES,
          tol: float = 1e-8) -> SweepTrace:
    """Volumes, Santalo polar volumes and products at n equispaced t in [-c, c]."""
    if n < 5:
        raise ValueError("need at least 5 samples")
    ts = np.linspace(-c, c, n)
    vols, gs, prods, oks = [], [], [], []
    for t in ts:
        Q = deform(P, s, t)
        res = santalo_point(Q, tol, check=False)
        vols.append(res.volume)
        gs.append(res.polar_volume)
        prods.append(res.product)
        oks.append(lattice_equal(Q, P))
    return SweepTrace(ts, np.array(vols), np.array(gs), np.array(prods), np.array(oks))


def volume_affine_residual(P: Polytope, s: SpeedAssignment, c: float, n: int = AFFINE_SAMPLES) -> float:
    """Max residual of a least-squares affine fit of |P_t|, relative to |P|."""
    ts = np.linspace(-c, c, n)
    vols = np.array([volume(deform(P, s, t), check=False) for t in ts])
    A = np.column_stack([np.ones(n), ts])
    coef, *_ = np.linalg.lstsq(A, vols, rcond=None)
    return float(np.abs(A @ coef - vols).max() / volume(P, check=False))


@dataclass
class ConvexityReport:
    min_second_difference: float
    violations: List[int]
    ok: bool


def convexity_check(trace: SweepTrace, tol: float = 1e-7) -> ConvexityReport:
    """Second differences of 1/polar_volume, relative to its largest value, must be >= -tol."""
    if not np.all(trace.lattice_ok):
        raise PreconditionUnmet("lattice changed inside the sweep")
    h = 1.0 / np.asarray(trace.polar_volumes, dtype=float)
    d2 = (h[:-2] - 2.0 * h[1:-1] + h[2:]) / np.abs(h).max()
    bad = [int(i) + 1 for i in np.nonzero(d2 < -tol)[0]]
    return ConvexityReport(float(d2.min()), bad, not bad)


@dataclass
class ConstancyReport:
    max_deviation: float
    min_D: float
    constant: bool


def constancy_check(trace: SweepTrace, tol: float = 1e-6) -> ConstancyReport:
    """Deviation of the product from its value at t = 0, given a minimum there."""
    ts = np.asarray(trace.ts)
    mid = int(np.argmin(np.abs(ts)))
    prods = np.asarray(trace.products)
    p0 = prods[mid]
    if prods.min() < p0 * (1.0 - tol):
        where = int(np.argmin(prods))
        raise PreconditionUnmet(f"product is minimal at t={ts[where]:.6g}, not at t=0")
    f = np.asarray(trace.volumes)
    h = 1.0 / np.asarray(trace.polar_volumes)
    D = h[mid] * f - f[mid] * h
    dev = float(np.abs(prods - p0).max() / p0)
    return ConstancyReport(dev, float(D.min() / (h[mid] * f[mid])), dev <= tol)


def facet_affine_fit(P: Polytope, k: int, alpha: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """(w, beta, residual) with alpha_i ~= w . x_i + beta on facet k, w in the facet plane."""
    n, _ = P.plane(k)
    u, v = _plane_basis(n)
    rows = [P.vertex_row[i] for i in P.cycles[k]]
    pts = P.points[rows]
    A = np.column_stack([pts @ u, pts @ v, np.ones(len(rows))])
    vals = np.asarray(alpha, dtype=float)[rows]
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    resid = float(np.abs(A @ coef - vals).max())
    return coef[0] * u + coef[1] * v, float(coef[2]), resid


def normal_update(P: Polytope, k: int, s: SpeedAssignment, t: float) -> np.ndarray:
    """Unnormalized normal of the moved facet k: (1 + t theta.w) v - t (theta.v) w."""
    n, _ = P.plane(k)
    w, beta, resid = facet_affine_fit(P, k, s.alpha)
    scale = 1e-8 * max(1.0, float(np.abs(s.alpha).max()))
    tv = float(s.theta @ n)
    if resid > scale:
        if abs(tv) <= PARALLEL_TOL:
            raise ParallelFacet(f"facet {k} is parallel to theta and the speed is not affine on it")
        raise NotAdmissible([k])
    return (1.0 + t * float(s.theta @ w)) * n - t * tv * w


def offset_update(P: Polytope, k: int, s: SpeedAssignment, t: float) -> float:
    """Common value of x_i(t) . v_k(t) over the vertices of facet k."""
    n, h = P.plane(k)
    w, beta, _ = facet_affine_fit(P, k, s.alpha)
    return h + t * (float(s.theta @ w) * h + float(s.theta @ n) * beta)
