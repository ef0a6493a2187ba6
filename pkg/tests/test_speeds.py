import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mahler3d import (Alternative, SpeedAssignment, admissibility_violations, admissible_space,
                      combinatorial_alternative, dimension_bound_check, hull, nontrivial_speed, polar, santalo_point,
                      shape)
from mahler3d.errors import DegenerateInput
from mahler3d.speeds import (bound_direction, constraint_matrix, facet_edge_directions, facet_parallel,
                             nontrivial_speeds, speeds_report, trivial_space)
from mahler3d import rational

E1, E2 = np.eye(3)[0], np.eye(3)[1]


def _facet_with_normal(P, n):
    return next(k for k in P.lattice.facet_labels if np.allclose(P.plane(k)[0], n))


def test_facet_parallel_examples(cube):
    k = _facet_with_normal(cube, E1)
    assert facet_parallel(cube, k, E2)
    assert not facet_parallel(cube, k, E1)
    assert not facet_parallel(cube, k, (E1 + E2) / np.sqrt(2))


def test_dimension_examples(simplex, octahedron, cube, rng):
    for theta in rng.normal(size=(5, 3)):
        assert admissible_space(simplex, theta).dim == 4
        assert admissible_space(octahedron, theta).dim == 6
    space = admissible_space(cube, E1)
    assert space.exact and space.dim == 6
    C, exact, constrained, _ = constraint_matrix(cube, E1)
    assert exact and len(C) == 2 and rational.rank(C, 8) == 2


def test_trivial_space_rank(simplex, cube, random_bodies):
    for P in [simplex, cube] + random_bodies:
        T = trivial_space(P)
        assert T.shape == (4, P.V) and np.linalg.matrix_rank(T) == 4


def test_trivial_speeds_are_admissible_exactly(cube, random_bodies, rng):
    for P in [cube, shape("dodecahedron")] + random_bodies:
        theta = rng.normal(size=3)
        for row in trivial_space(P):
            assert admissibility_violations(P, SpeedAssignment(theta, row)) == []
    # exact check on rational coordinates: C T^T vanishes identically
    C, exact, _, _ = constraint_matrix(cube, E1)
    T = [[Fraction(float(x)) for x in row] for row in trivial_space(cube)]
    assert exact
    assert all(sum(a * b for a, b in zip(c, t)) == 0 for c in C for t in T)


def test_nontrivial_speed_examples(simplex, octahedron, cube):
    assert nontrivial_speed(simplex, np.array([0.3, -0.2, 0.9])) is None
    assert nontrivial_speed(octahedron, np.array([0.3, -0.2, 0.9])) is not None
    s = nontrivial_speed(cube, E1)
    assert s is not None and admissibility_violations(cube, s) == []
    T = trivial_space(cube)
    coef, *_ = np.linalg.lstsq(T.T, s.alpha, rcond=None)
    assert np.linalg.norm(T.T @ coef - s.alpha) > 0.5


def test_hand_made_cube_speed(cube):
    x, y = cube.points[:, 0], cube.points[:, 1]
    alpha = np.where(x > 0, y, 0.0)
    s = SpeedAssignment(E1, alpha)
    assert admissibility_violations(cube, s) == []
    T = trivial_space(cube)
    coef, *_ = np.linalg.lstsq(T.T, alpha, rcond=None)
    assert np.linalg.norm(T.T @ coef - alpha) > 1e-3


def test_inadmissible_speed_names_facet(cube):
    alpha = np.zeros(8)
    alpha[np.argmax(cube.points @ np.array([1.0, 2.0, 4.0]))] = 1.0  # the corner (1, 1, 1)
    bad = admissibility_violations(cube, SpeedAssignment(E1, alpha))
    assert bad == [_facet_with_normal(cube, E1)]


def test_several_nontrivial_speeds_are_orthonormal(octahedron):
    speeds = nontrivial_speeds(octahedron, np.array([0.2, 0.5, 0.8]), 5)
    assert len(speeds) == 2
    A = np.array([s.alpha for s in speeds])
    assert np.allclose(A @ A.T, np.eye(2), atol=1e-12)
    assert np.allclose(A @ trivial_space(octahedron).T, 0, atol=1e-10)


@pytest.mark.parametrize("name,bound,ok", [("cube", 3, True), ("simplex", 4, True), ("dodecahedron", -2, True)])
def test_dimension_bound_examples(name, bound, ok):
    rep = dimension_bound_check(shape(name))
    assert rep.bound == bound and rep.satisfied == ok
    if name == "simplex":
        assert rep.dim == 4
    if name == "cube":
        assert rep.dim >= 6


def test_dodecahedron_trivial_dim():
    rep = dimension_bound_check(shape("dodecahedron"))
    assert rep.trivial_dim == 4 and not rep.space.exact


@pytest.mark.parametrize("name,alt", [("cube", Alternative.PolarMoves), ("octahedron", Alternative.PrimalMoves),
                                      ("simplex", Alternative.Tetrahedron)])
def test_alternative_examples(name, alt):
    assert combinatorial_alternative(shape(name)) is alt


def test_polar_side_has_speed_for_cube(cube):
    Q = polar(cube, santalo_point(cube).point)
    _, theta = bound_direction(Q)
    assert nontrivial_speed(Q, theta) is not None


def test_speeds_report(cube):
    rep = speeds_report(cube)
    assert rep["alternative"] == "PolarMoves"
    assert rep["criteria"] == {"primal": False, "polar": True}
    assert rep["dim"] == len(rep["basis"])


def _integer_body(seed):
    rng = np.random.default_rng(seed)
    while True:
        pts = rng.integers(-2, 3, size=(int(rng.integers(6, 20)), 3)).astype(float)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                P = hull(pts)
        except DegenerateInput:
            continue
        if not P.issues:
            return P


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_exact_and_float_dimensions_agree(seed):
    P = _integer_body(seed)
    for k in P.lattice.facet_labels:
        for theta in facet_edge_directions(P, k)[:1]:
            ex = admissible_space(P, theta, exact=True)
            fl = admissible_space(P, theta, exact=False)
            assert ex.dim == fl.dim
            assert ex.trivial_dim == fl.trivial_dim == 4


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_dimension_bound_every_facet(seed):
    P = _integer_body(seed)
    for k in P.lattice.facet_labels:
        m = len(P.cycles[k])
        theta = facet_edge_directions(P, k)[0]
        assert admissible_space(P, theta).dim >= P.F - P.V + m + 1


def test_speed_assignment_rejects_zero_theta():
    with pytest.raises(ValueError):
        SpeedAssignment(np.zeros(3), np.zeros(4))
