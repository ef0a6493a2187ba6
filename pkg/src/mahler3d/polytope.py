"""Three-dimensional convex polytopes with labeled face lattices.

A :class:`Polytope` stores its vertex coordinates together with the labeled
incidence structure (vertices, edges, facets and the maps between them).
Labels are plain integers and are never renumbered by operations that keep
the combinatorics; ``hull`` uses the input indices of the surviving points as
vertex labels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from . import _kernels
from .errors import DegenerateInput, InvalidPolytope

PLANE_RTOL = 1e-9


@dataclass(frozen=True)
class FaceLattice:
    """Labeled face lattice: label sets and the incidence maps phi1, phi2.

    ``phi1[i]`` is the set of edge labels incident to vertex ``i`` and
    ``phi2[j]`` the set of facet labels containing edge ``j``.  Label tuples
    are kept sorted so that two lattices compare equal exactly when the
    labeled incidences coincide.
    """

    vertex_labels: Tuple[int, ...]
    edge_labels: Tuple[int, ...]
    facet_labels: Tuple[int, ...]
    phi1: Mapping[int, FrozenSet[int]]
    phi2: Mapping[int, FrozenSet[int]]

    @property
    def counts(self) -> Tuple[int, int, int]:
        return len(self.vertex_labels), len(self.edge_labels), len(self.facet_labels)

    def edge_vertices(self) -> Dict[int, FrozenSet[int]]:
        ends: Dict[int, set] = {j: set() for j in self.edge_labels}
        for i, edges in self.phi1.items():
            for j in edges:
                ends.setdefault(j, set()).add(i)
        return {j: frozenset(v) for j, v in ends.items()}

    def phi0(self) -> Dict[int, FrozenSet[int]]:
        """Vertex-facet incidence derived from phi1 and phi2."""
        out: Dict[int, set] = {k: set() for k in self.facet_labels}
        for i, edges in self.phi1.items():
            for j in edges:
                for k in self.phi2.get(j, ()):
                    out.setdefault(k, set()).add(i)
        return {k: frozenset(v) for k, v in out.items()}

    def vertex_facets(self) -> Dict[int, FrozenSet[int]]:
        out: Dict[int, set] = {i: set() for i in self.vertex_labels}
        for k, verts in self.phi0().items():
            for i in verts:
                out.setdefault(i, set()).add(k)
        return {i: frozenset(v) for i, v in out.items()}


class Issue(NamedTuple):
    invariant: str
    labels: Tuple[int, ...]
    message: str


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex 3-polytope.

    ``points`` rows follow ``lattice.vertex_labels``; ``normals``/``offsets``
    rows follow ``lattice.facet_labels``.  ``cycles[k]`` lists the vertex
    labels of facet ``k`` counterclockwise as seen from outside.
    """

    points: np.ndarray
    lattice: FaceLattice
    cycles: Mapping[int, Tuple[int, ...]]
    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        for arr in (self.points, self.normals, self.offsets):
            arr.setflags(write=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_cycles(
        cls,
        labels: Sequence[int],
        points: np.ndarray,
        cycles: Mapping[int, Sequence[int]],
        edge_labels: Optional[Mapping[FrozenSet[int], int]] = None,
        planes: Optional[Mapping[int, Tuple[np.ndarray, float]]] = None,
    ) -> "Polytope":
        """Build a polytope from vertex coordinates and oriented facet cycles.

        Edge labels default to the rank of the sorted endpoint pair.  Facet
        planes default to the Newell normal of each cycle.
        """
        labels = [int(i) for i in labels]
        points = np.asarray(points, dtype=float).reshape(len(labels), 3)
        order = np.argsort(labels, kind="stable")
        labels = [labels[o] for o in order]
        points = points[order]
        row = {lab: r for r, lab in enumerate(labels)}

        cyc = {int(k): tuple(int(i) for i in c) for k, c in cycles.items()}
        pairs = set()
        for c in cyc.values():
            for a, b in zip(c, c[1:] + c[:1]):
                pairs.add(frozenset((a, b)))
        if edge_labels is None:
            ordered = sorted(pairs, key=lambda p: tuple(sorted(p)))
            edge_labels = {p: j for j, p in enumerate(ordered)}
        else:
            edge_labels = {frozenset(p): int(j) for p, j in edge_labels.items() if frozenset(p) in pairs}

        phi1: Dict[int, set] = {i: set() for i in labels}
        phi2: Dict[int, set] = {j: set() for j in edge_labels.values()}
        for p, j in edge_labels.items():
            for i in p:
                phi1.setdefault(i, set()).add(j)
        for k, c in cyc.items():
            for a, b in zip(c, c[1:] + c[:1]):
                phi2[edge_labels[frozenset((a, b))]].add(k)

        facet_labels = tuple(sorted(cyc))
        lattice = FaceLattice(
            vertex_labels=tuple(labels),
            edge_labels=tuple(sorted(phi2)),
            facet_labels=facet_labels,
            phi1={i: frozenset(v) for i, v in sorted(phi1.items())},
            phi2={j: frozenset(v) for j, v in sorted(phi2.items())},
        )
        normals = np.empty((len(facet_labels), 3))
        offsets = np.empty(len(facet_labels))
        for r, k in enumerate(facet_labels):
            if planes is not None and k in planes:
                n, h = planes[k]
                normals[r] = n
                offsets[r] = h
            else:
                pts = points[[row[i] for i in cyc[k]]]
                n = newell_normal(pts)
                normals[r] = n
                offsets[r] = float((pts @ n).mean())
        return cls(points, lattice, cyc, normals, offsets)

    # -- sizes ------------------------------------------------------------

    @property
    def V(self) -> int:
        return len(self.lattice.vertex_labels)

    @property
    def E(self) -> int:
        return len(self.lattice.edge_labels)

    @property
    def F(self) -> int:
        return len(self.lattice.facet_labels)

    @cached_property
    def diameter(self) -> float:
        return float(pdist(self.points).max()) if len(self.points) > 1 else 0.0

    @property
    def plane_tol(self) -> float:
        return PLANE_RTOL * self.diameter

    @cached_property
    def barycenter(self) -> np.ndarray:
        return self.points.mean(axis=0)

    @cached_property
    def vertex_row(self) -> Dict[int, int]:
        return {lab: r for r, lab in enumerate(self.lattice.vertex_labels)}

    @cached_property
    def facet_row(self) -> Dict[int, int]:
        return {lab: r for r, lab in enumerate(self.lattice.facet_labels)}

    def vertex(self, label: int) -> np.ndarray:
        return self.points[self.vertex_row[label]]

    def plane(self, label: int) -> Tuple[np.ndarray, float]:
        r = self.facet_row[label]
        return self.normals[r], float(self.offsets[r])

    # -- kernel arrays ----------------------------------------------------

    @cached_property
    def triangles(self) -> np.ndarray:
        """Fan triangulation of every facet from its lowest-labeled vertex (row indices)."""
        tris = []
        for k in self.lattice.facet_labels:
            c = _rotate_to_min(self.cycles[k])
            rows = [self.vertex_row[i] for i in c]
            for a, b in zip(rows[1:-1], rows[2:]):
                tris.append((rows[0], a, b))
        return np.asarray(tris, dtype=np.int64).reshape(-1, 3)

    @cached_property
    def facet_csr(self) -> Tuple[np.ndarray, np.ndarray]:
        ptr = [0]
        idx = []
        for k in self.lattice.facet_labels:
            idx.extend(self.vertex_row[i] for i in self.cycles[k])
            ptr.append(len(idx))
        return np.asarray(ptr, dtype=np.int64), np.asarray(idx, dtype=np.int64)

    @cached_property
    def vertex_cycles(self) -> Dict[int, Tuple[int, ...]]:
        """Facets around each vertex in cyclic order (facet labels)."""
        # in facet k the successor of i is b; the next facet around i is the
        # one where b precedes i
        pred: Dict[Tuple[int, int], int] = {}
        succ: Dict[Tuple[int, int], int] = {}
        for k, c in self.cycles.items():
            m = len(c)
            for e, i in enumerate(c):
                succ[(k, i)] = c[(e + 1) % m]
                pred[(i, c[e - 1])] = k
        out = {}
        vf = self.lattice.vertex_facets()
        for i in self.lattice.vertex_labels:
            incident = vf.get(i, frozenset())
            if not incident:
                out[i] = ()
                continue
            start = min(incident)
            ring = [start]
            k = start
            for _ in range(len(incident)):
                k = pred.get((i, succ[(k, i)]))
                if k is None or k == start:
                    break
                ring.append(k)
            out[i] = tuple(ring)
        return out

    @cached_property
    def dual_triangles(self) -> np.ndarray:
        """Fan triangulation of the polar facets, as facet-row indices."""
        tris = []
        for i in self.lattice.vertex_labels:
            ring = _rotate_to_min(self.vertex_cycles[i])
            rows = [self.facet_row[k] for k in ring]
            for a, b in zip(rows[1:-1], rows[2:]):
                tris.append((rows[0], a, b))
        return np.asarray(tris, dtype=np.int64).reshape(-1, 3)

    @cached_property
    def issues(self) -> Tuple[Issue, ...]:
        return tuple(_collect_issues(self))

    def with_points(self, points: np.ndarray) -> "Polytope":
        """Same labeled lattice and cycles, new coordinates, planes refitted."""
        return Polytope.from_cycles(
            self.lattice.vertex_labels,
            points,
            self.cycles,
            edge_labels={ends: j for j, ends in self.lattice.edge_vertices().items()},
        )

    def relabeled(self) -> "Polytope":
        """Copy with vertex labels 0..V-1 and facet labels 0..F-1 (canonical edges)."""
        vmap = {lab: r for r, lab in enumerate(self.lattice.vertex_labels)}
        cycles = {
            r: tuple(vmap[i] for i in self.cycles[k]) for r, k in enumerate(self.lattice.facet_labels)
        }
        return Polytope.from_cycles(range(self.V), self.points, cycles)


def _rotate_to_min(c: Sequence[int]) -> Tuple[int, ...]:
    c = tuple(c)
    if not c:
        return c
    m = c.index(min(c))
    return c[m:] + c[:m]


def newell_normal(pts: np.ndarray) -> np.ndarray:
    q = np.roll(pts, -1, axis=0)
    n = np.array([
        ((pts[:, 1] - q[:, 1]) * (pts[:, 2] + q[:, 2])).sum(),
        ((pts[:, 2] - q[:, 2]) * (pts[:, 0] + q[:, 0])).sum(),
        ((pts[:, 0] - q[:, 0]) * (pts[:, 1] + q[:, 1])).sum(),
    ])
    norm = np.linalg.norm(n)
    return n / norm if norm > 0 else n


# ---------------------------------------------------------------------------
# hull


def _plane_basis(normal: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a = np.eye(3)[np.argmin(np.abs(normal))]
    u = np.cross(normal, a)
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def _polygon_ccw(uv: np.ndarray, ids: Sequence[int], tol: float) -> list:
    """Strictly convex hull of planar points, counterclockwise (monotone chain)."""
    order = sorted(range(len(ids)), key=lambda r: (uv[r, 0], uv[r, 1], ids[r]))

    def turn(o, a, b):
        cr = (uv[a, 0] - uv[o, 0]) * (uv[b, 1] - uv[o, 1]) - (uv[a, 1] - uv[o, 1]) * (uv[b, 0] - uv[o, 0])
        return cr - tol * np.hypot(uv[b, 0] - uv[o, 0], uv[b, 1] - uv[o, 1])

    lower: list = []
    for r in order:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], r) <= 0:
            lower.pop()
        lower.append(r)
    upper: list = []
    for r in reversed(order):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], r) <= 0:
            upper.pop()
        upper.append(r)
    return [ids[r] for r in lower[:-1] + upper[:-1]]


def hull(points: Iterable[Sequence[float]]) -> Polytope:
    """Convex hull with coplanar triangles merged into maximal facets.

    Vertex labels are the input indices of the extreme points. Points that are
    not extreme (interior, duplicated, or lying inside a facet or edge) are
    dropped with a warning.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DegenerateInput(f"expected an (n, 3) array of points, got shape {pts.shape}")
    if len(pts) < 4:
        raise DegenerateInput(f"need at least 4 points, got {len(pts)}")
    if not np.isfinite(pts).all():
        raise DegenerateInput("non-finite coordinates")
    diam = float(pdist(pts).max()) if len(pts) <= 2000 else float(np.ptp(pts, axis=0).max() * np.sqrt(3))
    if diam == 0.0:
        raise DegenerateInput("all points coincide")
    tol = PLANE_RTOL * diam
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    if np.abs(centered @ vt[2]).max() <= tol:
        raise DegenerateInput("points are coplanar within tolerance")
    if sv[1] <= tol:
        raise DegenerateInput("points are collinear within tolerance")
    try:
        qh = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateInput(f"qhull failed: {exc}") from None

    cand = np.asarray(qh.vertices)
    inner = pts[cand].mean(axis=0)
    groups: Dict[FrozenSet[int], np.ndarray] = {}
    for eq in qh.equations:
        n = eq[:3] / np.linalg.norm(eq[:3])
        d = pts[cand] @ n
        h = float(np.max(d))
        on = frozenset(int(i) for i in cand[d >= h - tol])
        if on in groups or len(on) < 3:
            continue
        groups[on] = n

    # the tolerance test is not transitive: a near-coplanar triangle can show
    # up both on its own and inside a larger group
    sets = sorted(groups, key=len, reverse=True)
    maximal = [g for i, g in enumerate(sets) if not any(g < h for h in sets[:i])]

    def cycle(ids):
        sub = pts[ids]
        if len(ids) > 3:
            c = sub - sub.mean(axis=0)
            n = np.linalg.svd(c, full_matrices=False)[2][2]
        else:
            n = np.cross(sub[1] - sub[0], sub[2] - sub[0])
            n /= np.linalg.norm(n)
        if np.dot(n, sub.mean(axis=0) - inner) < 0:
            n = -n
        u, w = _plane_basis(n)
        return _polygon_ccw(np.column_stack([sub @ u, sub @ w]), ids, tol)

    cycles_raw = []
    for on in maximal:
        poly = cycle(sorted(on))
        if len(poly) < 3:
            continue
        if len(poly) > 3:
            # the merged facet must also be flat with respect to its own
            # Newell plane, which is what validation measures
            sub = pts[poly]
            d = sub @ newell_normal(sub)
            if np.ptp(d) > tol:
                cycles_raw += [cycle(sorted(int(i) for i in tri)) for tri in qh.simplices if set(tri) <= on]
                continue
        cycles_raw.append(tuple(poly))

    keep = sorted({i for c in cycles_raw for i in c})
    dropped = len(pts) - len(keep)
    if dropped:
        warnings.warn(f"hull dropped {dropped} non-extreme point(s)", stacklevel=2)
    # facets whose polygons collapsed onto kept vertices only
    cycles_raw = sorted({_rotate_to_min(c) for c in cycles_raw}, key=lambda c: tuple(sorted(c)))
    cycles = {k: c for k, c in enumerate(cycles_raw)}
    poly = Polytope.from_cycles(keep, pts[keep], cycles)
    return poly


# ---------------------------------------------------------------------------
# validation and measurement


def _collect_issues(P: Polytope):
    lat = P.lattice
    V, E, F = lat.counts
    if P.points.shape != (V, 3):
        yield Issue("shape", (), f"points array has shape {P.points.shape}, expected ({V}, 3)")
        return
    if P.normals.shape != (F, 3) or P.offsets.shape != (F,):
        yield Issue("shape", (), "facet plane arrays do not match the facet labels")
        return
    if not np.isfinite(P.points).all():
        yield Issue("finite", (), "non-finite vertex coordinates")
        return
    if V - E + F != 2:
        yield Issue("euler", (), f"V - E + F = {V} - {E} + {F} = {V - E + F} != 2")

    ends = lat.edge_vertices()
    for j in lat.edge_labels:
        if len(ends.get(j, ())) != 2:
            yield Issue("edge-endpoints", (j,), f"edge {j} has {len(ends.get(j, ()))} endpoints")
        nf = len(lat.phi2.get(j, ()))
        if nf != 2:
            yield Issue("edge-facets", (j,), f"edge {j} lies in {nf} facets, expected 2")
    for j in set(lat.phi2) - set(lat.edge_labels):
        yield Issue("labels", (j,), f"phi2 has unknown edge label {j}")
    for i in set(lat.phi1) - set(lat.vertex_labels):
        yield Issue("labels", (i,), f"phi1 has unknown vertex label {i}")
    known_f = set(lat.facet_labels)
    for j, ks in lat.phi2.items():
        for k in ks - known_f:
            yield Issue("labels", (j, k), f"edge {j} maps to unknown facet {k}")

    phi0 = lat.phi0()
    for k in lat.facet_labels:
        if len(phi0.get(k, ())) < 3:
            yield Issue("facet-size", (k,), f"facet {k} has {len(phi0.get(k, ()))} vertices")
    vf = lat.vertex_facets()
    for i in lat.vertex_labels:
        if len(vf.get(i, ())) < 3:
            yield Issue("vertex-degree", (i,), f"vertex {i} lies in {len(vf.get(i, ()))} facets")

    for k in lat.facet_labels:
        c = P.cycles.get(k)
        if c is None:
            yield Issue("cycle", (k,), f"facet {k} has no boundary cycle")
            continue
        if set(c) != set(phi0.get(k, ())):
            yield Issue("cycle", (k,), f"cycle of facet {k} disagrees with phi0")
        for a, b in zip(c, c[1:] + c[:1]):
            shared = lat.phi1.get(a, frozenset()) & lat.phi1.get(b, frozenset())
            if not any(k in lat.phi2.get(j, ()) for j in shared):
                yield Issue("cycle", (k, a, b), f"cycle of facet {k} steps {a}->{b} without an edge")

    centered = P.points - P.points.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    tol = P.plane_tol
    if len(sv) < 3 or sv[2] <= tol:
        yield Issue("full-dimensional", (), "vertices do not affinely span 3-space")
        return

    for r, k in enumerate(lat.facet_labels):
        n, h = P.normals[r], P.offsets[r]
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            yield Issue("plane", (k,), f"normal of facet {k} is not unit")
            continue
        d = P.points @ n - h
        on = phi0.get(k, frozenset())
        for row, i in enumerate(lat.vertex_labels):
            if i in on and abs(d[row]) > tol:
                yield Issue("plane", (k, i), f"vertex {i} is off the plane of facet {k} by {d[row]:.3g}")
            elif i not in on and d[row] >= -tol:
                yield Issue("plane", (k, i), f"vertex {i} is not strictly below facet {k}")
        c = P.cycles.get(k)
        if c is not None and len(c) >= 3:
            nn = newell_normal(P.points[[P.vertex_row[i] for i in c if i in P.vertex_row]])
            if np.dot(nn, n) <= 0:
                yield Issue("orientation", (k,), f"cycle of facet {k} is not counterclockwise from outside")

    for i in lat.vertex_labels:
        rows = [P.facet_row[k] for k in vf.get(i, ()) if k in P.facet_row]
        if rows and np.linalg.matrix_rank(P.normals[rows], tol=1e-9) < 3:
            yield Issue("extreme", (i,), f"vertex {i} is not an extreme point")


def validate(P: Polytope) -> list:
    """Every violated invariant with its offending labels; empty iff ``P`` is valid."""
    return list(P.issues)


def ensure_valid(P: Polytope) -> Polytope:
    if P.issues:
        raise InvalidPolytope(i.message for i in P.issues)
    return P


def volume(P: Polytope, check: bool = True) -> float:
    """Volume as a fan of tetrahedra from the vertex barycenter."""
    if check:
        ensure_valid(P)
    return _kernels.fan_volume(P.points, P.triangles, P.barycenter)


def facet_stats(P: Polytope) -> Tuple[int, int]:
    """(max vertices on a facet, max vertex degree)."""
    delta = max(len(c) for c in P.cycles.values())
    degree = max(len(e) for e in P.lattice.phi1.values())
    return delta, degree


def lattice_equal(P: Polytope, Q: Polytope) -> bool:
    return P.lattice == Q.lattice


def centroid(P: Polytope) -> np.ndarray:
    """Centroid of the solid polytope."""
    p = P.barycenter
    a = P.points[P.triangles[:, 0]] - p
    b = P.points[P.triangles[:, 1]] - p
    c = P.points[P.triangles[:, 2]] - p
    w = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    return p + (w[:, None] * (a + b + c)).sum(axis=0) / (4.0 * w.sum())


# ---------------------------------------------------------------------------
# built-in shapes

_PHI = (1.0 + 5.0 ** 0.5) / 2.0


def _shape_points(name: str) -> np.ndarray:
    if name in ("simplex", "tetrahedron"):
        return np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)
    if name == "cube":
        return np.array([(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
    if name == "octahedron":
        return np.vstack([np.eye(3), -np.eye(3)])
    if name == "dodecahedron":
        pts = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
        ip = 1.0 / _PHI
        for a in (-1, 1):
            for b in (-1, 1):
                pts += [(0, a * ip, b * _PHI), (a * ip, b * _PHI, 0), (a * _PHI, 0, b * ip)]
        return np.array(pts, dtype=float)
    if name == "icosahedron":
        pts = []
        for a in (-1, 1):
            for b in (-1, 1):
                pts += [(0, a, b * _PHI), (a, b * _PHI, 0), (a * _PHI, 0, b)]
        return np.array(pts, dtype=float)
    raise KeyError(name)


SHAPES = ("simplex", "cube", "octahedron", "dodecahedron", "icosahedron")


def shape(name: str) -> Polytope:
    """Built-in polytope by name (see ``SHAPES``); ``tetrahedron`` is an alias of ``simplex``."""
    try:
        pts = _shape_points(name)
    except KeyError:
        raise ValueError(f"unknown shape {name!r}; choose from {', '.join(SHAPES)}") from None
    return hull(pts)
