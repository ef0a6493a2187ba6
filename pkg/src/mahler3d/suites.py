"""Invariant suites run by ``mahler3d verify`` and by the test harness.

Every instance is described by a small picklable tuple so that batches can be
farmed out to worker processes; results come back in input order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .descent import TETRA_PRODUCT, random_polytope
from .errors import MahlerError
from .offio import read_off
from .polar import DEFAULT_TOL, polar, santalo_point
from .polytope import SHAPES, Polytope, shape, validate
from .shadow import CONVEXITY_SAMPLES, convexity_check, persistence_interval, sweep, volume_affine_residual
from .speeds import (Alternative, SpeedAssignment, bound_direction, combinatorial_alternative,
                     dimension_bound_check, nontrivial_speed)

Instance = Tuple  # ("shape", name) | ("random", n, seed) | ("off", path)

PRODUCT_SLACK = 1e-6
BIPOLAR_RTOL = 1e-8
MONOTONE_SLACK = 1e-7
AFFINE_RTOL = 1e-9
CONVEXITY_TOL = 1e-7
SHADOW_CAP = 0.5


def build(inst: Instance) -> Polytope:
    kind = inst[0]
    if kind == "shape":
        return shape(inst[1])
    if kind == "random":
        return random_polytope(int(inst[1]), int(inst[2]))
    if kind == "off":
        return read_off(inst[1])
    raise ValueError(f"unknown instance kind {kind!r}")


def describe(inst: Instance) -> str:
    if inst[0] == "random":
        return f"random(n={inst[1]}, seed={inst[2]})"
    return str(inst[1])


def random_instances(count: int, seed: int, vmin: int = 4, vmax: int = 30) -> List[Instance]:
    """``count`` seeded random-polytope descriptors with vertex counts in [vmin, vmax]."""
    rng = np.random.default_rng(seed)
    return [("random", int(rng.integers(vmin, vmax + 1)), int(rng.integers(2 ** 31))) for _ in range(count)]


def default_instances(count: int, seed: int) -> List[Instance]:
    return [("shape", name) for name in SHAPES] + random_instances(count, seed)


def _check(name: str, ok: bool, **detail) -> Tuple[str, dict]:
    return name, {"pass": bool(ok), **detail}


def _shadow_speed(P: Polytope) -> Tuple[SpeedAssignment, bool]:
    _, theta = bound_direction(P)
    s = nontrivial_speed(P, theta)
    if s is not None:
        return s, True
    # an affine speed is admissible for every direction
    x = P.points[:, 0] - P.points[:, 0].mean()
    return SpeedAssignment(theta, x / np.linalg.norm(x)), False


def check_instance(inst: Instance, tol: float = DEFAULT_TOL, samples: int = CONVEXITY_SAMPLES) -> dict:
    """Run every per-polytope invariant on one instance; never raises."""
    out: Dict[str, dict] = {}
    products: List[float] = []
    entry = {"instance": describe(inst), "checks": out, "products": products}
    try:
        P = build(inst)
    except (MahlerError, OSError, ValueError) as exc:
        out["build"] = {"pass": False, "error": str(exc)}
        return entry
    entry.update(V=P.V, E=P.E, F=P.F)

    def run(name, fn):
        try:
            k, v = fn()
        except (MahlerError, ValueError, np.linalg.LinAlgError) as exc:
            k, v = name, {"pass": False, "error": f"{type(exc).__name__}: {exc}"}
        out[k] = v

    issues = validate(P)
    out["valid"] = {"pass": not issues, "issues": [i.message for i in issues]}
    if issues:
        return entry

    state = {}

    def product():
        res = santalo_point(P, tol)
        state["res"] = res
        products.append(res.product)
        return _check("product_bound", res.product >= TETRA_PRODUCT - PRODUCT_SLACK,
                      product=res.product, residual=res.residual)

    def duality():
        Q = polar(P, state["res"].point)
        state["Q"] = Q
        ok = Q.V == P.F and Q.F == P.V and Q.E == P.E and not validate(Q)
        return _check("polar_duality", ok, polar_V=Q.V, polar_F=Q.F)

    def bipolar():
        Q = state["Q"]
        B = polar(Q, state["res"].point)
        err = max(float(np.abs(B.vertex(i) - P.vertex(i)).max()) for i in P.lattice.vertex_labels)
        return _check("bipolar", err <= BIPOLAR_RTOL * P.diameter, max_error=err)

    def monotone():
        q = santalo_point(state["Q"], tol).product
        products.append(q)
        p = state["res"].product
        return _check("product_monotonicity", q <= p + MONOTONE_SLACK, polar_product=q, product=p)

    def dimension():
        rep = dimension_bound_check(P)
        entry["dim"], entry["bound"], entry["trivial_dim"] = rep.dim, rep.bound, rep.trivial_dim
        return _check("dimension_bound", rep.satisfied, dim=rep.dim, bound=rep.bound,
                      equality=rep.dim == rep.bound)

    def alternative():
        alt = combinatorial_alternative(P)
        entry["alternative"] = alt.value
        if P.V == 4:
            return _check("alternative", alt is Alternative.Tetrahedron, alternative=alt.value)
        if alt is Alternative.Tetrahedron:
            return _check("alternative", False, alternative=alt.value)
        body = P if alt in (Alternative.PrimalMoves, Alternative.Both) else polar(P, state["res"].point)
        _, theta = bound_direction(body)
        s = nontrivial_speed(body, theta)
        return _check("alternative", s is not None, alternative=alt.value,
                      side="primal" if body is P else "polar")

    def shadow():
        s, nontrivial = _shadow_speed(P)
        c = persistence_interval(P, s, cap=SHADOW_CAP)
        if c <= 0:
            return _check("shadow_laws", False, c=c, nontrivial=nontrivial)
        resid = volume_affine_residual(P, s, c)
        tr = sweep(P, s, c, n=max(samples, 5), tol=tol)
        products.extend(float(p) for p in tr.products)
        persists = bool(np.all(tr.lattice_ok))
        conv = convexity_check(tr, CONVEXITY_TOL) if persists else None
        ok = resid < AFFINE_RTOL and persists and conv is not None and conv.ok
        return _check("shadow_laws", ok, c=c, nontrivial=nontrivial, affine_residual=resid,
                      lattice_persists=persists,
                      min_second_difference=None if conv is None else conv.min_second_difference)

    run("product_bound", product)
    if "res" in state:
        run("polar_duality", duality)
        if "Q" in state:
            run("bipolar", bipolar)
            run("product_monotonicity", monotone)
    run("dimension_bound", dimension)
    if "res" in state:
        run("alternative", alternative)
    run("shadow_laws", shadow)
    return entry


def _star(args):
    return check_instance(*args)


def run_suite(instances: Sequence[Instance], tol: float = DEFAULT_TOL, samples: int = CONVEXITY_SAMPLES,
              jobs: Optional[int] = None) -> dict:
    """Check all instances, in parallel when ``jobs`` != 1, and summarize."""
    args = [(inst, tol, samples) for inst in instances]
    if jobs is None:
        jobs = min(len(args), os.cpu_count() or 1)
    if jobs <= 1 or len(args) <= 1:
        results = [_star(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_star, args))
    failures = [(r["instance"], name) for r in results for name, v in r["checks"].items() if not v["pass"]]
    return {
        "instances": results,
        "summary": {
            "instances": len(results),
            "checks": sum(len(r["checks"]) for r in results),
            "failures": [f"{inst}: {name}" for inst, name in failures],
            "pass": not failures,
        },
    }


def all_products(report: dict) -> Iterable[float]:
    for r in report["instances"]:
        yield from r["products"]
