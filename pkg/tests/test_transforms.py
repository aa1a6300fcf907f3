import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from convex_monge.geometry import ConvexCurveSpec, sample_uniform_arclength
from convex_monge.transforms import (
    arg_set,
    box_powers,
    check_box_inequality,
    check_boxbox_bounds,
    cyclic_runs,
    inf_transform,
    lipschitz_estimate,
    sup_transform,
    theta_profile,
)
from convex_monge.transport import PotentialPair, cost_matrix

finite = st.floats(-10, 10, allow_nan=False)


def brute_inf(eta, C, direction):
    m, n = C.shape
    if direction == "M->N":
        return np.array([min(C[i, j] - eta[i] for i in range(m)) for j in range(n)])
    return np.array([min(C[i, j] - eta[j] for j in range(n)) for i in range(m)])


def brute_sup(eta, C, direction):
    m, n = C.shape
    if direction == "M->N":
        return np.array([max(C[i, j] - eta[i] for i in range(m)) for j in range(n)])
    return np.array([max(C[i, j] - eta[j] for j in range(n)) for i in range(m)])


@pytest.mark.parametrize("shape", [(1, 1), (3, 7), (17, 5), (64, 64)])
def test_transforms_equal_brute_force_exactly(shape, rng):
    C = cost_matrix(rng.normal(size=(shape[0], 2)), rng.normal(size=(shape[1], 2)))
    phi = rng.normal(size=shape[0])
    psi = rng.normal(size=shape[1])
    np.testing.assert_array_equal(inf_transform(phi, C, "M->N"), brute_inf(phi, C, "M->N"))
    np.testing.assert_array_equal(inf_transform(psi, C, "N->M"), brute_inf(psi, C, "N->M"))
    np.testing.assert_array_equal(sup_transform(phi, C, "M->N"), brute_sup(phi, C, "M->N"))
    np.testing.assert_array_equal(sup_transform(psi, C, "N->M"), brute_sup(psi, C, "N->M"))


def test_shape_and_direction_errors():
    C = np.zeros((3, 4))
    with pytest.raises(ValueError):
        inf_transform(np.zeros(4), C, "M->N")
    with pytest.raises(ValueError):
        sup_transform(np.zeros(3), C, "sideways")


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(1, 12),
    n=st.integers(1, 12),
    seed=st.integers(0, 2**31),
    shift=finite,
)
def test_transform_laws(m, n, seed, shift):
    rng = np.random.default_rng(seed)
    C = cost_matrix(rng.normal(size=(m, 2)), rng.normal(size=(n, 2)))
    phi = rng.normal(size=m)
    bigger = phi + np.abs(rng.normal(size=m))
    # order reversal
    assert np.all(inf_transform(bigger, C) <= inf_transform(phi, C))
    assert np.all(sup_transform(bigger, C) <= sup_transform(phi, C))
    # constant shift
    np.testing.assert_allclose(inf_transform(phi + shift, C), inf_transform(phi, C) - shift, atol=1e-12)
    # phi** >= phi, phi*** == phi*
    star = inf_transform(phi, C, "M->N")
    starstar = inf_transform(star, C, "N->M")
    assert np.all(starstar >= phi - 1e-12)
    np.testing.assert_allclose(inf_transform(starstar, C, "M->N"), star, atol=1e-12)
    # box identities
    check = check_boxbox_bounds(phi, C)
    assert check.passed, check
    box = box_powers(phi, C, 1)[0]
    assert check_box_inequality(phi, box, C).passed
    # inf never exceeds sup
    assert np.all(star <= box)


@settings(max_examples=30, deadline=None)
@given(phi=arrays(float, 16, elements=st.floats(-1, 1)))
def test_lipschitz_bound_on_circles(phi):
    surf_m = sample_uniform_arclength(ConvexCurveSpec.circle(1.0), 16)
    surf_n = sample_uniform_arclength(ConvexCurveSpec.circle(2.0), 24)
    box = sup_transform(phi, cost_matrix(surf_m, surf_n))
    est = lipschitz_estimate(box, surf_n, surf_m)
    assert est.holds
    assert est.radius_bound == pytest.approx(3.0)


def test_box_equality_marks_argmax():
    C = cost_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[0.0, 0.0], [3.0, 0.0]]))
    phi = np.zeros(2)
    box = sup_transform(phi, C)
    eq = check_box_inequality(phi, box, C).equality
    np.testing.assert_array_equal(eq, [[False, True], [True, False]])


def test_theta_profile_sides():
    C = np.arange(12.0).reshape(3, 4)
    pot = PotentialPair(np.array([1.0, 2.0, 3.0]), np.zeros(4))
    np.testing.assert_array_equal(theta_profile(2, "on_M", pot, C).values, C[:, 2] - pot.phi)
    np.testing.assert_array_equal(theta_profile(1, "on_N", pot, C).values, C[1])
    with pytest.raises(ValueError):
        theta_profile(0, "on_X", pot, C)


def test_arg_set_clusters_wrap_around():
    values = np.array([0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0, 0.0])
    s = arg_set(values, "argmin")
    np.testing.assert_array_equal(s.indices, [0, 6, 7])
    assert len(s.clusters) == 1 and s.representatives == [0]
    assert 7 in s and 3 not in s
    top = arg_set(values, "argmax")
    assert list(top.indices) == [3] and not top.degenerate
    assert arg_set(np.ones(5), "argmax").degenerate


def test_cyclic_runs():
    runs = cyclic_runs([0, 1, 4, 5, 9], 10)
    assert [r.tolist() for r in runs] == [[9, 0, 1], [4, 5]]
    assert cyclic_runs([], 5) == []
