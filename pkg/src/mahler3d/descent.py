"""Volume-product descent over admissible shadow systems.

Each step looks for a non-trivial admissible speed on the current polytope or
on its Santalo polar (the side is suggested by the integer criteria of the
combinatorial alternative), moves along the shadow system inside the range on
which the face lattice persists, and keeps the move when the volume product
drops.  The next iterate is the hull of the moved vertices of whichever body
was deformed, so a polar-side step continues from the deformed polar.
"""

from __future__ import annotations

import enum
import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import _kernels
from .errors import DegenerateInput, MahlerError, NonConvergence, NotAdmissible
from .offio import write_off
from .polar import DEFAULT_TOL, polar, santalo_point
from .polytope import Polytope, ensure_valid, hull
from .shadow import moved, moved_points, persistence_bracket
from .speeds import (Alternative, SpeedAssignment, bound_direction, combinatorial_alternative,
                     facet_edge_directions, nontrivial_speeds)

log = logging.getLogger(__name__)

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
TETRA_PRODUCT = 64.0 / 9.0
# lattice breaks are bracketed far below the plane tolerance so that the hull
# just past a break merges the facets that became coplanar
BREAK_RTOL = 1e-12
BEYOND_STEPS = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1)


class Side(enum.Enum):
    Start = "Start"
    Primal = "Primal"
    Polar = "Polar"


class Termination(enum.Enum):
    ReachedTetrahedron = "ReachedTetrahedron"
    NoDecrease = "NoDecrease"
    IterationCap = "IterationCap"


@dataclass
class Step:
    polytope: Polytope
    side: Side
    theta: Optional[np.ndarray]
    speed: Optional[np.ndarray]
    t_star: float
    product: float

    def to_json(self, index: int) -> dict:
        return {
            "step": index,
            "side": self.side.value,
            "theta": None if self.theta is None else self.theta.tolist(),
            "speed": None if self.speed is None else self.speed.tolist(),
            "t_star": self.t_star,
            "product": self.product,
            "V": self.polytope.V,
            "F": self.polytope.F,
        }


@dataclass
class DescentTrace:
    steps: List[Step]
    final_product: float
    terminated: Termination
    anomalies: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    @property
    def products(self) -> np.ndarray:
        return np.array([s.product for s in self.steps])

    @property
    def final(self) -> Polytope:
        return self.steps[-1].polytope

    def write(self, out_dir) -> Path:
        """JSON-lines trace plus one OFF snapshot per step."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = []
        for n, step in enumerate(self.steps):
            name = f"step_{n:03d}.off"
            write_off(step.polytope.relabeled(), out / name)
            rec = step.to_json(n)
            rec["off"] = name
            lines.append(json.dumps(rec))
        lines.append(json.dumps({
            "final_product": self.final_product,
            "terminated": self.terminated.value,
            "anomalies": self.anomalies,
            "errors": self.errors,
        }))
        path = out / "trace.jsonl"
        path.write_text("\n".join(lines) + "\n")
        return path


def normalize(P: Polytope) -> Polytope:
    """Per-axis affine map of the bounding box onto [-1, 1]^3, relabeled compactly."""
    lo, hi = P.points.min(axis=0), P.points.max(axis=0)
    pts = (P.points - 0.5 * (lo + hi)) * (2.0 / (hi - lo))
    Q = P.relabeled().with_points(pts)
    if Q.issues:
        # a facet merged within tolerance can leave it once the axes are
        # stretched; recompute the facets of the stretched points
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            Q = hull(pts).relabeled()
        if Q.issues:
            raise DegenerateInput(f"normalized polytope is not valid: {Q.issues[0].message}")
    return Q


def random_polytope(n: int, seed: int) -> Polytope:
    """Hull of n uniform points on the unit sphere; retries seed + 1 on degeneracy."""
    if n < 4:
        raise ValueError("need n >= 4")
    for attempt in range(100):
        rng = np.random.default_rng(seed + attempt)
        pts = rng.normal(size=(n, 3))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        try:
            P = hull(pts)
        except DegenerateInput:
            continue
        if not P.issues:
            return P
    raise DegenerateInput(f"no valid polytope from seeds {seed}..{seed + 99}")


def _product(P: Polytope, tol: float) -> float:
    return santalo_point(P, tol, probes=0, check=False).product


def _line_search(body: Polytope, speed: SpeedAssignment, lo: float, hi: float, evals: int, tol: float,
                 errors: list):
    """Golden-section search for the smallest product on [lo, hi], ends included."""
    def phi(t):
        try:
            return _product(moved(body, speed, t), tol)
        except NonConvergence as exc:
            errors.append(f"line search at t={t:.6g}: {exc}")
            return np.inf

    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = phi(x1), phi(x2)
    for _ in range(max(evals - 2, 0)):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = phi(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = phi(x2)
    f_best, t_best = min((f1, x1), (f2, x2))
    # an optimum pressed against an end is taken at the end, where the caller
    # can continue past the lattice break
    for end in (lo, hi):
        if end == 0.0:
            continue
        f_end = phi(end)
        near = abs(t_best - end) <= 1e-6 * (hi - lo)
        if f_end <= f_best or (near and f_end <= f_best * (1.0 + 1e-9)):
            f_best, t_best = f_end, end
    return t_best, f_best


def _rehull(body: Polytope, speed: SpeedAssignment, t: float) -> Polytope:
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        Q = hull(moved_points(body, speed, t))
    if Q.issues:
        raise DegenerateInput(f"hull at t={t:.6g} is not a valid polytope: {Q.issues[0].message}")
    Q = normalize(Q)
    # an iterate that fails its own facet certificate has no room to move
    ptr, idx = Q.facet_csr
    if not _kernels.facet_certificate(Q.points, ptr, idx, Q.plane_tol):
        raise DegenerateInput(f"hull at t={t:.6g} is within tolerance of a lattice change")
    return Q


def _progress(cand: Polytope, p: float, body: Polytope, cur_product: float, tol: float) -> bool:
    """Enough decrease, or a vertex dropped without any increase."""
    return p <= cur_product * (1.0 - tol) or (cand.V < body.V and p < cur_product)


def _continue_past_break(body, speed, sign, c, c_fail, cur_product, tol, solver_tol, trace_errors):
    """Best hull just beyond the first lattice break that makes progress, or None.

    Past the break the polytope is still ``conv{x_i + t alpha_i theta}`` with a
    different face lattice.  Stopping exactly at the break would leave a
    degenerate iterate (a collapsed facet or a vertex on a facet plane) from
    which every admissible motion breaks the lattice at once.
    """
    best = None
    for frac in BEYOND_STEPS:
        t = sign * (c_fail + frac * c)
        try:
            cand = _rehull(body, speed, t)
            p = _product(cand, solver_tol)
        except MahlerError as exc:
            trace_errors.append(f"past-break probe at t={t:.6g}: {exc}")
            continue
        if _progress(cand, p, body, cur_product, tol) and (best is None or p < best[0]):
            best = (p, t, cand)
    return best


def _try_side(cur: Polytope, cur_product: float, side: Side, step_cap: float, tol: float,
              evals: int, solver_tol: float, trace_errors: list, flat: list, speeds_per_theta: int = 3):
    if side is Side.Primal:
        body = cur
    else:
        try:
            body = normalize(polar(cur, santalo_point(cur, solver_tol, probes=0, check=False).point))
        except MahlerError as exc:
            trace_errors.append(f"polar side unavailable: {exc}")
            return None
    k, theta0 = bound_direction(body)
    thetas = [theta0] + facet_edge_directions(body, k)[1:]
    # the leading speed for every direction first; further kernel directions
    # only when none of those decreases the product
    pool = [nontrivial_speeds(body, th, speeds_per_theta) for th in thetas]
    candidates = [(th, sp[0]) for th, sp in zip(thetas, pool) if sp]
    candidates += [(th, extra) for th, sp in zip(thetas, pool) for extra in sp[1:]]
    for theta, speed in candidates:
        try:
            c_neg, fail_neg = persistence_bracket(body, speed, step_cap, rtol=BREAK_RTOL, sign=-1)
            c_pos, fail_pos = persistence_bracket(body, speed, step_cap, rtol=BREAK_RTOL, sign=1)
        except NotAdmissible as exc:
            # kernel directions of an ill-conditioned constraint matrix
            trace_errors.append(f"{side.value} speed rejected: {exc}")
            continue
        if max(c_neg, c_pos) <= 0:
            continue
        t_star, value = _line_search(body, speed, -c_neg, c_pos, evals, solver_tol, trace_errors)
        ends = [(e, c_e, f) for e, c_e, f in ((-1.0, c_neg, fail_neg), (1.0, c_pos, fail_pos))
                if f is not None and t_star == e * c_e]
        found = None
        if value <= cur_product * (1.0 - tol):
            try:
                nxt = _rehull(body, speed, t_star)
                found = (_product(nxt, solver_tol), t_star, nxt)
            except MahlerError as exc:
                trace_errors.append(f"rehull at t={t_star:.6g}: {exc}")
        for end, c_end, fail in ends:
            past = _continue_past_break(body, speed, end, c_end, fail, cur_product, tol, solver_tol, trace_errors)
            if past is not None and (found is None or past[0] < found[0]):
                found = past
        if found is not None and _progress(found[2], found[0], body, cur_product, tol):
            p, t, nxt = found
            return Step(nxt, side, speed.theta, speed.alpha, float(t), p)
        best = value if found is None else found[0]
        flat.append(f"{side.value} theta={np.round(theta, 6).tolist()} best={best:.12g}")
    return None


def descend(P: Polytope, cap_iter: int = 50, step_cap: float = 0.5, tol: float = 1e-7,
            evals: int = 40, solver_tol: float = DEFAULT_TOL) -> DescentTrace:
    """Search for a lower volume product along admissible shadow systems."""
    ensure_valid(P)
    cur = normalize(P)
    cur_product = santalo_point(cur, solver_tol).product
    steps = [Step(cur, Side.Start, None, None, 0.0, cur_product)]
    errors: List[str] = []
    anomalies: List[str] = []
    terminated = Termination.IterationCap
    for it in range(cap_iter):
        if cur.V == 4:
            terminated = Termination.ReachedTetrahedron
            break
        alt = combinatorial_alternative(cur)
        if alt is Alternative.PolarMoves:
            order = [Side.Polar, Side.Primal]
        else:
            order = [Side.Primal, Side.Polar]
        flat: List[str] = []
        step = None
        for side in order:
            step = _try_side(cur, cur_product, side, step_cap, tol, evals, solver_tol, errors, flat)
            if step is not None:
                break
        if step is None:
            terminated = Termination.NoDecrease
            if flat:
                msg = (f"ANOMALOUS: iterate {it} with V={cur.V} (alternative {alt.value}) has "
                       f"non-trivial speeds but no decrease: " + "; ".join(flat))
            else:
                msg = (f"STALLED: iterate {it} with V={cur.V} (alternative {alt.value}) has no "
                       f"non-trivial speed with a positive persistence interval on either side")
            log.warning(msg)
            anomalies.append(msg)
            break
        log.info("step %d: %s side, V=%d, product %.12g", it, step.side.value, step.polytope.V, step.product)
        steps.append(step)
        cur, cur_product = step.polytope, step.product
    else:
        if cur.V == 4:
            terminated = Termination.ReachedTetrahedron
    return DescentTrace(steps, cur_product, terminated, anomalies, errors)


__all__ = ["DescentTrace", "Side", "Step", "TETRA_PRODUCT", "Termination", "descend", "normalize",
           "random_polytope"]
