import warnings

import numpy as np
import pytest

from mahler3d import (NotAdmissible, ParallelFacet, PreconditionUnmet, SpeedAssignment, SweepTrace,
                      constancy_check, convexity_check, deform, hull, lattice_equal, nontrivial_speed, normal_update,
                      offset_update, persistence_interval, sweep, volume, volume_affine_residual)
from mahler3d.shadow import moved_points, persistence_bracket
from mahler3d.speeds import trivial_space

TETRA = 64.0 / 9.0
E1, E2, E3 = np.eye(3)


@pytest.fixture
def cube_speed(cube):
    x, y = cube.points[:, 0], cube.points[:, 1]
    return SpeedAssignment(E1, np.where(x > 0, y, 0.0))


@pytest.fixture
def shear(simplex):
    # alpha = w.x + beta with w = e_1, beta = 0.5, moving along e_2
    return SpeedAssignment(E2, simplex.points[:, 0] + 0.5)


def _top(P):
    return next(k for k in P.lattice.facet_labels if P.plane(k)[0][0] > 0.5)


def test_deform_at_zero(cube, cube_speed, random_bodies):
    assert lattice_equal(deform(cube, cube_speed, 0.0), cube)
    P = random_bodies[2]
    s = nontrivial_speed(P, E3)
    assert lattice_equal(deform(P, s, 0.0), P)


def test_deform_cube_top_plane(cube, cube_speed):
    Q = deform(cube, cube_speed, 0.3)
    assert lattice_equal(Q, cube)
    n, h = Q.plane(_top(Q))
    expected = np.array([1.0, -0.3, 0.0]) / np.hypot(1.0, 0.3)
    assert np.allclose(n, expected) and h == pytest.approx(1.0 / np.hypot(1.0, 0.3))


def test_affine_speed_is_shear(random_bodies, rng):
    for P in random_bodies:
        theta = rng.normal(size=3)
        w, beta = rng.normal(size=3), rng.normal()
        s = SpeedAssignment(theta, P.points @ w + beta)
        t = 0.2
        A = np.eye(3) + t * np.outer(s.theta, w)
        Q = deform(P, s, t)
        assert np.allclose(Q.points, P.points @ A.T + t * beta * s.theta, rtol=0, atol=1e-10)
        assert lattice_equal(Q, P)


def test_persistence_examples(simplex, cube, cube_speed, rng):
    s = SpeedAssignment(rng.normal(size=3), rng.normal(size=4))
    assert persistence_interval(simplex, s, cap=0.25) == 0.25
    assert persistence_interval(cube, cube_speed, cap=0.5) == 0.5


def test_persistence_is_tight(cube, cube_speed):
    c, c_fail = persistence_bracket(cube, cube_speed, cap=5.0)
    assert c_fail is not None and c_fail - c <= 1e-6 * 5.0 + 1e-12
    for t in np.linspace(-c, c, 64):
        assert lattice_equal(deform(cube, cube_speed, t), cube)
    probes = [sg * t for sg in (-1, 1) for t in (c_fail, c_fail + 1e-6 * 5.0)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert not all(lattice_equal(deform(cube, cube_speed, t), cube) for t in probes)


def test_persistence_rejects_inadmissible(cube, rng):
    alpha = rng.normal(size=8)
    with pytest.raises(NotAdmissible) as err:
        persistence_interval(cube, SpeedAssignment(E1, alpha))
    assert err.value.facets


def test_sweep_cube_volume_constant(cube, cube_speed):
    tr = sweep(cube, cube_speed, 0.4, n=9)
    assert len(tr.ts) == 9
    assert np.allclose(tr.volumes, 8.0, rtol=1e-13)
    assert tr.lattice_ok.all()
    assert convexity_check(tr).ok


def test_sweep_shear_products(simplex, shear):
    tr = sweep(simplex, shear, 0.2, n=9)
    assert np.allclose(tr.products, TETRA, rtol=1e-6)
    conv = convexity_check(tr)
    assert conv.ok and abs(conv.min_second_difference) < 1e-9
    rep = constancy_check(tr)
    assert rep.constant and rep.max_deviation < 1e-6


def test_volume_affine(cube, cube_speed, random_bodies):
    assert volume_affine_residual(cube, cube_speed, 0.5) < 1e-9
    for P in random_bodies[1:]:
        s = nontrivial_speed(P, E1)
        c = persistence_interval(P, s, cap=0.5)
        assert c > 0
        assert volume_affine_residual(P, s, c) < 1e-9


def test_convexity_detects_concave_bump():
    ts = np.linspace(-1, 1, 9)
    g = 1.0 / (2.0 + ts ** 2)
    g[4] = 1.0 / 2.5  # pushes 1/g up at the middle sample
    tr = SweepTrace(ts, np.ones(9), g, g, np.ones(9, dtype=bool))
    rep = convexity_check(tr)
    assert not rep.ok and rep.violations == [4]


def test_convexity_requires_persistent_lattice():
    tr = SweepTrace(np.arange(5.0), np.ones(5), np.ones(5), np.ones(5), np.array([True] * 4 + [False]))
    with pytest.raises(PreconditionUnmet):
        convexity_check(tr)


def test_constancy_preconditions(cube, cube_speed):
    tr = sweep(cube, cube_speed, 0.4, n=9)
    try:
        rep = constancy_check(tr)
    except PreconditionUnmet:
        pass
    else:
        assert not rep.constant
    ts = np.linspace(-1, 1, 7)
    down = SweepTrace(ts, np.ones(7), np.ones(7), 10.0 - ts, np.ones(7, dtype=bool))
    with pytest.raises(PreconditionUnmet):
        constancy_check(down)


def test_normal_update_examples(cube, cube_speed):
    k = _top(cube)
    n0, _ = cube.plane(k)
    assert np.array_equal(normal_update(cube, k, cube_speed, 0.0), n0)
    v = normal_update(cube, k, cube_speed, 0.3)
    assert np.allclose(v, [1.0, -0.3, 0.0])
    pts = moved_points(cube, cube_speed, 0.3)[[cube.vertex_row[i] for i in cube.cycles[k]]]
    dots = pts @ v
    assert np.allclose(dots, dots[0], atol=1e-14)
    assert offset_update(cube, k, cube_speed, 0.3) == pytest.approx(dots[0])


def test_normal_update_matches_shear(random_bodies, rng):
    P = random_bodies[4]
    theta = rng.normal(size=3)
    w, beta = rng.normal(size=3), rng.normal()
    s = SpeedAssignment(theta, P.points @ w + beta)
    Q = deform(P, s, 0.15)
    for k in P.lattice.facet_labels:
        v = normal_update(P, k, s, 0.15)
        assert np.allclose(v / np.linalg.norm(v), Q.plane(k)[0], atol=1e-9)


def test_normal_update_errors(cube, rng):
    side = next(k for k in cube.lattice.facet_labels if abs(cube.plane(k)[0][1]) > 0.5)
    alpha = np.zeros(8)
    alpha[cube.vertex_row[cube.cycles[side][0]]] = 1.0
    with pytest.raises(ParallelFacet):
        normal_update(cube, side, SpeedAssignment(E1, alpha), 0.1)
    top = _top(cube)
    alpha = np.zeros(8)
    alpha[cube.vertex_row[cube.cycles[top][0]]] = 1.0
    with pytest.raises(NotAdmissible):
        normal_update(cube, top, SpeedAssignment(E1, alpha), 0.1)


def test_sweep_csv_round_trip(cube, cube_speed):
    tr = sweep(cube, cube_speed, 0.4, n=5)
    text = tr.to_csv()
    assert text.splitlines()[0] == "t,volume,polar_volume,product,lattice_ok"
    back = SweepTrace.from_csv(text)
    assert np.array_equal(back.products, tr.products) and back.lattice_ok.all()


def test_sweep_products_respect_bound(random_bodies):
    for P in random_bodies[:4]:
        s = nontrivial_speed(P, E2)
        c = persistence_interval(P, s, cap=0.5)
        tr = sweep(P, s, c)
        assert tr.products.min() >= TETRA - 1e-6
        assert convexity_check(tr).ok


def test_sweep_needs_five_samples(cube, cube_speed):
    with pytest.raises(ValueError):
        sweep(cube, cube_speed, 0.1, n=3)


def test_trivial_speed_keeps_volume_affine(simplex):
    s = SpeedAssignment(E3, trivial_space(simplex)[1])
    vols = [volume(hull(moved_points(simplex, s, t))) for t in (-0.2, 0.0, 0.2)]
    assert vols[0] + vols[2] == pytest.approx(2 * vols[1])
