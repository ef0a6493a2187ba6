import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from mahler3d import (DegenerateInput, FaceLattice, Polytope, facet_stats, hull, lattice_equal, shape, validate,
                      volume)
from mahler3d.polytope import ensure_valid, centroid
from mahler3d.errors import InvalidPolytope


def _counts(P):
    return P.V, P.E, P.F


def test_hull_tetrahedron_counts():
    P = hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert _counts(P) == (4, 6, 4)


def test_hull_cube_counts(cube):
    assert _counts(cube) == (8, 12, 6)
    assert all(len(c) == 4 for c in cube.cycles.values())


def test_hull_octahedron_counts(octahedron):
    assert _counts(octahedron) == (6, 12, 8)
    assert all(len(c) == 3 for c in octahedron.cycles.values())


def test_hull_labels_are_input_indices():
    pts = [(0, 0, 0), (0.1, 0.1, 0.1), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    with pytest.warns(UserWarning, match="dropped 1"):
        P = hull(pts)
    assert P.lattice.vertex_labels == (0, 2, 3, 4)


def test_hull_drops_points_inside_facets(cube):
    pts = np.vstack([cube.points, [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        P = hull(pts)
    assert _counts(P) == (8, 12, 6)


@pytest.mark.parametrize("pts", [
    [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
    [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)],
    [(0, 0, 0), (1, 1, 1), (2, 2, 2), (3, 3, 3), (4, 4, 4)],
    [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, np.nan)],
])
def test_hull_rejects_degenerate(pts):
    with pytest.raises(DegenerateInput):
        hull(pts)


def test_validate_clean(cube):
    assert validate(cube) == []


def _without_facet(P, k):
    cycles = {j: c for j, c in P.cycles.items() if j != k}
    pairs = {frozenset(e): j for j, e in P.lattice.edge_vertices().items()}
    return Polytope.from_cycles(P.lattice.vertex_labels, P.points, cycles, edge_labels=pairs)


def test_validate_reports_euler(cube):
    bad = _without_facet(cube, cube.lattice.facet_labels[0])
    kinds = {i.invariant for i in validate(bad)}
    assert "euler" in kinds
    with pytest.raises(InvalidPolytope):
        ensure_valid(bad)


def test_validate_reports_edge_in_three_facets(cube):
    # an extra triangle over an existing cube edge
    k0 = cube.lattice.facet_labels[0]
    a, b = cube.cycles[k0][:2]
    cycles = dict(cube.cycles)
    cycles[max(cycles) + 1] = (a, b, cube.cycles[k0][2])
    bad = Polytope.from_cycles(cube.lattice.vertex_labels, cube.points, cycles)
    assert any(i.invariant == "edge-facets" for i in validate(bad))


def test_volume_examples(cube, simplex, octahedron):
    assert volume(cube) == pytest.approx(8.0, rel=1e-14)
    assert volume(octahedron) == pytest.approx(4.0 / 3.0, rel=1e-14)
    x = simplex.points
    det = abs(np.linalg.det(np.array([x[1] - x[0], x[2] - x[0], x[3] - x[0]]))) / 6.0
    assert det == pytest.approx(8.0 / 3.0)
    assert volume(simplex) == pytest.approx(det, rel=1e-14)


def test_platonic_volumes():
    phi = (1 + 5 ** 0.5) / 2
    # edge 2/phi for the dodecahedron and 2 for the icosahedron
    a = 2 / phi
    assert volume(shape("dodecahedron")) == pytest.approx((15 + 7 * 5 ** 0.5) / 4 * a ** 3, rel=1e-12)
    assert volume(shape("icosahedron")) == pytest.approx(5 * (3 + 5 ** 0.5) / 12 * 8, rel=1e-12)


@pytest.mark.parametrize("seed,n", [(0, 4), (1, 9), (2, 20), (3, 50)])
def test_volume_monte_carlo(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    pts *= (rng.uniform(size=(n, 1)) ** (1 / 3)) / np.linalg.norm(pts, axis=1)[:, None]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        P = hull(pts)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    box = float(np.prod(hi - lo))
    samples = rng.uniform(lo, hi, size=(1_000_000, 3))
    inside = np.all(samples @ P.normals.T <= P.offsets, axis=1)
    p = inside.mean()
    se = box * np.sqrt(p * (1 - p) / len(samples))
    assert abs(box * p - volume(P)) <= 3 * se


def test_facet_stats(cube, octahedron, simplex):
    assert facet_stats(cube) == (4, 3)
    assert facet_stats(octahedron) == (3, 4)
    assert facet_stats(simplex) == (3, 3)


def test_lattice_equal_examples(cube, octahedron):
    moved = cube.with_points(cube.points + np.array([3.0, -1.0, 2.0]))
    assert lattice_equal(cube, moved)
    assert not lattice_equal(cube, octahedron)
    # swap two labels that are not adjacent: the edges no longer match
    v = cube.lattice.vertex_labels
    a, b = v[0], v[-1]
    swap = {a: b, b: a}
    cycles = {k: tuple(swap.get(i, i) for i in c) for k, c in cube.cycles.items()}
    swapped = Polytope.from_cycles(v, cube.points, cycles)
    assert not lattice_equal(cube, swapped)


def test_centroid_of_simplex(simplex):
    assert np.allclose(centroid(simplex), simplex.points.mean(axis=0))


def test_relabeled_is_compact(random_bodies):
    P = random_bodies[-1]
    Q = P.relabeled()
    assert Q.lattice.vertex_labels == tuple(range(P.V))
    assert validate(Q) == []


def test_face_lattice_is_frozen(cube):
    assert isinstance(cube.lattice, FaceLattice)
    with pytest.raises(ValueError):
        cube.points[0, 0] = 5.0


clouds = st.integers(min_value=4, max_value=40).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(min_value=0, max_value=2 ** 31)))


@given(clouds)
def test_euler_and_edge_sum(case):
    n, seed = case
    pts = np.random.default_rng(seed).normal(size=(n, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        P = hull(pts)
    assert P.V - P.E + P.F == 2
    assert sum(len(c) for c in P.cycles.values()) == 2 * P.E
    assert validate(P) == []


@given(clouds)
def test_volume_invariant_under_permutation_and_rigid_motion(case):
    n, seed = case
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    R = Rotation.random(random_state=seed % 2 ** 32).as_matrix()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v0 = volume(hull(pts))
        v1 = volume(hull(pts[rng.permutation(n)] @ R.T + rng.normal(size=3)))
    assert v1 == pytest.approx(v0, rel=1e-9)
