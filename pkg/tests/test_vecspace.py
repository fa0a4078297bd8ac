import math

import numpy as np
import pytest

from zofl.vecspace import (
    FeasibleSet,
    Geometry,
    RngStream,
    as_vector,
    feasible_center,
    norm,
    project,
    prox_step,
    sample_ball,
    sample_ball_batch,
    sample_sphere,
    sample_sphere_batch,
    set_distance,
    sign_vector,
)


def test_as_vector_rejects_bad_input():
    with pytest.raises(ValueError):
        as_vector([[1.0, 2.0]])
    with pytest.raises(ValueError):
        as_vector([1.0, float("nan")])
    with pytest.raises(ValueError):
        as_vector([1.0, 2.0], d=3)


def test_norm_hand_values():
    x = np.array([3.0, -4.0])
    assert norm(x, 1) == 7.0
    assert norm(x, 2) == 5.0
    assert norm(x, math.inf) == 4.0
    with pytest.raises(ValueError):
        norm(x, 3)


def test_rng_stream_bitwise_reproducible():
    a = RngStream(123, (4, 5)).gen.uniform(size=100)
    b = RngStream(123, (4, 5)).gen.uniform(size=100)
    assert np.array_equal(a, b)
    c = RngStream(123, (4, 6)).gen.uniform(size=100)
    assert not np.array_equal(a, c)
    d = RngStream(124, (4, 5)).gen.uniform(size=100)
    assert not np.array_equal(a, d)


def test_rng_substream_matches_explicit_key():
    base = RngStream(9, (1,))
    sub = base.substream(2, 3)
    direct = RngStream(9, (1, 2, 3))
    assert np.array_equal(sub.gen.uniform(size=10), direct.gen.uniform(size=10))


def test_sphere_samples_have_unit_norm():
    for p in (1, 2):
        e = sample_sphere_batch(500, 7, p, RngStream(0, (p,)))
        nrm = np.abs(e).sum(axis=1) if p == 1 else np.linalg.norm(e, axis=1)
        assert np.max(np.abs(nrm - 1.0)) < 1e-12


def test_sphere_single_matches_batch_of_one():
    e1 = sample_sphere(6, 2, RngStream(5, (0,)))
    e2 = sample_sphere_batch(1, 6, 2, RngStream(5, (0,)))[0]
    assert np.array_equal(e1, e2)


def test_l1_sphere_component_second_moment():
    # cone measure on the l1 sphere in dimension d: E[e_i^2] = 2/(d(d+1))
    d = 10
    e = sample_sphere_batch(200_000, d, 1, RngStream(1, (0,)))
    measured = float((e**2).mean())
    assert measured == pytest.approx(2.0 / (d * (d + 1)), rel=0.02)


def test_l2_sphere_first_component_abs_moment():
    # E|e_1| on the l2 sphere is Gamma-ratio valued; about 0.1132 at d=50
    d = 50
    e = sample_sphere_batch(200_000, d, 2, RngStream(2, (0,)))
    measured = float(np.abs(e[:, 0]).mean())
    exact = math.gamma(d / 2) / (math.sqrt(math.pi) * math.gamma((d + 1) / 2))
    assert measured == pytest.approx(exact, rel=0.02)


def test_ball_samples_radial_law():
    # P(||x|| <= 1/2) = (1/2)^d for the uniform ball law
    d = 3
    x = sample_ball_batch(200_000, d, 2, RngStream(3, (0,)))
    nrm = np.linalg.norm(x, axis=1)
    assert np.max(nrm) <= 1.0 + 1e-12
    assert float((nrm <= 0.5).mean()) == pytest.approx(0.125, abs=0.005)
    single = sample_ball(d, 2, RngStream(3, (1,)))
    assert np.linalg.norm(single) <= 1.0


def test_sign_vector():
    assert np.array_equal(sign_vector(np.array([2.0, -0.5, 0.0])), np.array([1.0, -1.0, 0.0]))


def test_project_simplex_hand_value():
    assert np.allclose(project(np.array([2.0, 0.0]), FeasibleSet("simplex")), [1.0, 0.0])


def test_project_idempotent_and_feasible():
    rng = RngStream(4, (0,)).gen
    sets = [
        FeasibleSet("simplex"),
        FeasibleSet("box", lo=-1.0, hi=0.5),
        FeasibleSet("ball", radius=2.0),
        FeasibleSet("unconstrained"),
    ]
    for feasible in sets:
        for _ in range(50):
            x = rng.standard_normal(6) * 3.0
            p = project(x, feasible)
            assert np.max(np.abs(project(p, feasible) - p)) <= 1e-12
            assert set_distance(p, feasible) <= 1e-12
    p = project(np.array([0.2, 0.3, 0.5]), FeasibleSet("simplex"))
    assert np.allclose(p, [0.2, 0.3, 0.5], atol=1e-15)


def test_geometry_validation():
    with pytest.raises(ValueError):
        Geometry("entropy", FeasibleSet("ball"))
    with pytest.raises(ValueError):
        Geometry("spherical", FeasibleSet("simplex"))
    Geometry("entropy", FeasibleSet("simplex"))


def test_prox_euclidean_unconstrained_is_plain_step():
    geom = Geometry("euclidean", FeasibleSet("unconstrained"))
    rng = RngStream(6, (0,)).gen
    r = rng.standard_normal(5)
    xi = rng.standard_normal(5)
    assert np.array_equal(prox_step(r, xi, 0.37, geom), r - 0.37 * xi)


def test_prox_entropy_hand_value():
    geom = Geometry("entropy", FeasibleSet("simplex"))
    out = prox_step(np.array([0.5, 0.5]), np.array([-1.0, 1.0]), math.log(2.0), geom)
    assert np.allclose(out, [0.8, 0.2], atol=1e-15)
    assert out.sum() == pytest.approx(1.0, abs=1e-15)


def test_prox_entropy_stays_positive():
    geom = Geometry("entropy", FeasibleSet("simplex"))
    r = np.array([1.0 - 2e-16, 2e-16, 0.0])
    out = prox_step(r, np.array([100.0, -100.0, 0.0]), 1.0, geom)
    assert np.all(out > 0)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_prox_euclidean_projects_on_simplex():
    geom = Geometry("euclidean", FeasibleSet("simplex"))
    out = prox_step(np.array([0.5, 0.5]), np.array([-2.0, 2.0]), 1.0, geom)
    assert set_distance(out, FeasibleSet("simplex")) <= 1e-12


def test_feasible_center():
    assert np.allclose(feasible_center(FeasibleSet("simplex"), 4), [0.25] * 4)
    assert np.allclose(feasible_center(FeasibleSet("box", lo=-2.0, hi=4.0), 3), [1.0] * 3)
    assert np.allclose(feasible_center(FeasibleSet("ball", radius=3.0), 2), [0.0, 0.0])
