"""Admissible vertex speeds.

A speed vector assigns one scalar to each vertex label; moving vertex ``i``
by ``t * alpha[i] * theta`` keeps every facet planar exactly when, on each
facet not parallel to ``theta``, ``alpha`` is the trace of an affine function
on the facet plane.  Those conditions are linear in ``alpha``; this module
assembles them, counts the dimension of their solution space and extracts
speeds that are not globally affine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from . import rational
from .errors import DegeneratePolytope
from .polytope import Polytope, _plane_basis, _rotate_to_min, facet_stats

PARALLEL_TOL = 1e-10
SV_RTOL = 1e-8


@dataclass(frozen=True)
class SpeedAssignment:
    theta: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        norm = np.linalg.norm(theta)
        if not np.isfinite(norm) or norm == 0:
            raise ValueError("theta must be a non-zero finite vector")
        object.__setattr__(self, "theta", theta / norm)
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))


@dataclass
class AdmissibleBasis:
    theta: np.ndarray
    basis: np.ndarray
    dim: int
    trivial_dim: int
    affine: List[bool]
    exact: bool
    constrained: List[int] = field(default_factory=list)
    near_parallel: List[int] = field(default_factory=list)


class Alternative(enum.Enum):
    PrimalMoves = "PrimalMoves"
    PolarMoves = "PolarMoves"
    Both = "Both"
    Tetrahedron = "Tetrahedron"


def _unit(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return theta / np.linalg.norm(theta)


def facet_parallel(P: Polytope, k: int, theta) -> bool:
    """True iff ``theta`` lies in the direction plane of facet ``k``."""
    n, _ = P.plane(k)
    return abs(float(n @ _unit(theta))) <= PARALLEL_TOL


def _reference(P: Polytope, k: int) -> Tuple[int, ...]:
    return _rotate_to_min(P.cycles[k])


def _float_rows(P: Polytope, k: int) -> List[np.ndarray]:
    cyc = _reference(P, k)
    n, _ = P.plane(k)
    u, w = _plane_basis(n)
    pts = np.array([P.vertex(i) for i in cyc])
    uv = np.column_stack([pts @ u, pts @ w])
    M = np.vstack([uv[:3].T, np.ones(3)])
    rows = []
    for j in range(3, len(cyc)):
        a = np.linalg.solve(M, np.array([uv[j, 0], uv[j, 1], 1.0]))
        row = np.zeros(P.V)
        row[P.vertex_row[cyc[j]]] = 1.0
        for r in range(3):
            row[P.vertex_row[cyc[r]]] -= a[r]
        rows.append(row)
    return rows


def _exact_rows(P: Polytope, k: int) -> Optional[List[List[Fraction]]]:
    """Exact constraint rows, or None if the facet is not exactly planar in rationals."""
    cyc = _reference(P, k)
    pts = [[Fraction(float(x)) for x in P.vertex(i)] for i in cyc]
    p1, p2, p3 = pts[:3]
    e1 = [b - a for a, b in zip(p1, p2)]
    e2 = [b - a for a, b in zip(p1, p3)]
    nrm = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]]
    drop = max(range(3), key=lambda d: abs(nrm[d]))
    if nrm[drop] == 0:
        return None
    keep = [d for d in range(3) if d != drop]
    rows = []
    for j in range(3, len(cyc)):
        q = pts[j]
        if sum((q[d] - p1[d]) * nrm[d] for d in range(3)) != 0:
            return None
        a, b, c = rational.solve_affine_2d(*([p[d] for d in keep] for p in (p1, p2, p3, q)))
        row = [Fraction(0)] * P.V
        row[P.vertex_row[cyc[j]]] += 1
        row[P.vertex_row[cyc[0]]] -= a
        row[P.vertex_row[cyc[1]]] -= b
        row[P.vertex_row[cyc[2]]] -= c
        rows.append(row)
    return rows


def _constrained_facets(P: Polytope, theta: np.ndarray):
    constrained, near = [], []
    for r, k in enumerate(P.lattice.facet_labels):
        dot = abs(float(P.normals[r] @ theta))
        if dot <= PARALLEL_TOL:
            if dot > 0.0:
                near.append(k)
            continue
        if len(P.cycles[k]) >= 4:
            constrained.append(k)
    return constrained, near


def constraint_matrix(P: Polytope, theta, exact: Optional[bool] = None):
    """Stacked per-facet conditions; returns (rows, is_exact, constrained, near_parallel).

    ``exact=None`` uses rational arithmetic whenever every constrained facet is
    exactly planar in the rational values of the coordinates.
    """
    theta = _unit(theta)
    constrained, near = _constrained_facets(P, theta)
    if exact is not False:
        rows: List[List[Fraction]] = []
        ok = True
        for k in constrained:
            r = _exact_rows(P, k)
            if r is None:
                ok = False
                break
            rows.extend(r)
        if ok:
            return rows, True, constrained, near
        if exact:
            raise ValueError("coordinates are not exactly coplanar on every constrained facet")
    rows_f = [row for k in constrained for row in _float_rows(P, k)]
    C = np.array(rows_f).reshape(len(rows_f), P.V)
    return C, False, constrained, near


def trivial_space(P: Polytope) -> np.ndarray:
    """Evaluations of 1, x, y, z at the vertices, as a (4, V) array."""
    T = np.vstack([np.ones(P.V), P.points.T])
    s = np.linalg.svd(T, compute_uv=False)
    if s[-1] <= SV_RTOL * s[0]:
        raise DegeneratePolytope("vertices do not affinely span 3-space")
    return T


def _float_kernel(C: np.ndarray, n: int) -> np.ndarray:
    if C.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(C)
    r = int((s > SV_RTOL * s[0]).sum()) if s.size and s[0] > 0 else 0
    return vt[r:]


def _is_affine(T: np.ndarray, v: np.ndarray) -> bool:
    coef, *_ = np.linalg.lstsq(T.T, v, rcond=None)
    return bool(np.linalg.norm(T.T @ coef - v) <= 1e-9 * max(1.0, np.linalg.norm(v)))


def admissible_space(P: Polytope, theta, exact: Optional[bool] = None) -> AdmissibleBasis:
    """Basis of the admissible speeds for direction ``theta``."""
    theta = _unit(theta)
    C, is_exact, constrained, near = constraint_matrix(P, theta, exact)
    T = trivial_space(P)
    if is_exact:
        kernel = rational.nullspace(C, P.V) if C else [
            [Fraction(int(r == c)) for c in range(P.V)] for r in range(P.V)
        ]
        basis = np.array([[float(x) for x in v] for v in kernel]).reshape(len(kernel), P.V)
        if C:
            Tq = [[Fraction(float(x)) for x in row] for row in T]
            CT = [[sum(a * b for a, b in zip(crow, trow)) for trow in Tq] for crow in C]
            trivial_dim = 4 - rational.rank(CT, 4)
        else:
            trivial_dim = 4
    else:
        basis = _float_kernel(C, P.V)
        if C.shape[0]:
            CT = C @ T.T
            scale = np.linalg.norm(C, 2) * np.linalg.norm(T, 2)
            s = np.linalg.svd(CT, compute_uv=False)
            trivial_dim = 4 - int((s > SV_RTOL * scale).sum())
        else:
            trivial_dim = 4
    dim = basis.shape[0]
    affine = [_is_affine(T, v) for v in basis]
    return AdmissibleBasis(theta=theta, basis=basis, dim=dim, trivial_dim=trivial_dim, affine=affine,
                           exact=is_exact, constrained=constrained, near_parallel=near)


def admissibility_violations(P: Polytope, speed: SpeedAssignment, rtol: float = 1e-8) -> List[int]:
    """Facet labels whose affine condition ``speed`` violates."""
    theta = speed.theta
    alpha = np.asarray(speed.alpha, dtype=float)
    if alpha.shape != (P.V,):
        raise ValueError(f"speed has {alpha.size} entries, polytope has {P.V} vertices")
    scale = rtol * max(1.0, float(np.abs(alpha).max()))
    bad = []
    constrained, _ = _constrained_facets(P, theta)
    for k in constrained:
        res = np.array(_float_rows(P, k)) @ alpha
        if np.abs(res).max() > scale:
            bad.append(k)
    return bad


def nontrivial_speeds(P: Polytope, theta, count: int, space: Optional[AdmissibleBasis] = None
                      ) -> List[SpeedAssignment]:
    """Up to ``count`` orthonormal unit admissible speeds orthogonal to the globally affine ones.

    The first is the kernel-complement column of largest norm, which is what
    ``nontrivial_speed`` returns.
    """
    if space is None:
        space = admissible_space(P, theta)
    if space.dim <= 4:
        return []
    Q, _ = np.linalg.qr(trivial_space(P).T)
    # orthonormalize the kernel first so that the choice does not depend on
    # the scaling of the raw basis vectors
    K, _ = np.linalg.qr(space.basis.T)
    resid = K - Q @ (Q.T @ K)
    norms = np.linalg.norm(resid, axis=0)
    best = int(np.argmax(norms))  # first maximum, so ties go to the lowest index
    if norms[best] <= 1e-8:
        return []
    picks = [resid[:, best] / norms[best]]
    if count > 1:
        # further directions: principal directions of what is left
        rest = resid - np.outer(picks[0], picks[0] @ resid)
        U, sv, _ = np.linalg.svd(rest, full_matrices=False)
        picks += [U[:, j] for j in range(min(count - 1, int((sv > 1e-8).sum())))]
    out = []
    for alpha in picks:
        # fixed sign: largest-magnitude entry positive
        if alpha[np.argmax(np.abs(alpha))] < 0:
            alpha = -alpha
        out.append(SpeedAssignment(space.theta, alpha))
    return out


def nontrivial_speed(P: Polytope, theta, space: Optional[AdmissibleBasis] = None) -> Optional[SpeedAssignment]:
    """A unit admissible speed orthogonal to the globally affine ones, if any."""
    found = nontrivial_speeds(P, theta, 1, space)
    return found[0] if found else None


@dataclass
class DimensionReport:
    facet: int
    theta: np.ndarray
    dim: int
    trivial_dim: int
    bound: int
    satisfied: bool
    space: AdmissibleBasis


def bound_direction(P: Polytope) -> Tuple[int, np.ndarray]:
    """Largest facet (lowest label on ties) and its lowest-labeled edge direction."""
    delta, _ = facet_stats(P)
    k = min(k for k in P.lattice.facet_labels if len(P.cycles[k]) == delta)
    return k, facet_edge_directions(P, k)[0]


def facet_edge_directions(P: Polytope, k: int) -> List[np.ndarray]:
    ends = P.lattice.edge_vertices()
    dirs = []
    for j in sorted(j for j, ks in P.lattice.phi2.items() if k in ks):
        a, b = sorted(ends[j])
        d = P.vertex(b) - P.vertex(a)
        dirs.append(d / np.linalg.norm(d))
    return dirs


def dimension_bound_check(P: Polytope) -> DimensionReport:
    k, theta = bound_direction(P)
    space = admissible_space(P, theta)
    delta, _ = facet_stats(P)
    bound = P.F - P.V + delta + 1
    return DimensionReport(facet=k, theta=theta, dim=space.dim, trivial_dim=space.trivial_dim,
                           bound=bound, satisfied=space.dim >= bound, space=space)


def alternative_criteria(P: Polytope) -> Tuple[bool, bool]:
    delta, degree = facet_stats(P)
    return delta > P.V - P.F + 3, degree > P.F - P.V + 3


def combinatorial_alternative(P: Polytope) -> Alternative:
    primal, polar_side = alternative_criteria(P)
    if primal and polar_side:
        return Alternative.Both
    if primal:
        return Alternative.PrimalMoves
    if polar_side:
        return Alternative.PolarMoves
    return Alternative.Tetrahedron


def speeds_report(P: Polytope, theta=None) -> dict:
    if theta is None:
        rep = dimension_bound_check(P)
        space, bound = rep.space, rep.bound
    else:
        space = admissible_space(P, theta)
        delta, _ = facet_stats(P)
        bound = P.F - P.V + delta + 1
    primal, polar_side = alternative_criteria(P)
    return {
        "theta": space.theta.tolist(),
        "dim": space.dim,
        "trivial_dim": space.trivial_dim,
        "bound": bound,
        "basis": space.basis.tolist(),
        "criteria": {"primal": primal, "polar": polar_side},
        "alternative": combinatorial_alternative(P).value,
    }
