import numpy as np
import pytest

from convex_monge.criterion import (
    DegenerateProfileError,
    build_report,
    c1_probe,
    critical_points,
    d_line,
    gamma_mask,
    graph_support_metric,
    map_T,
    slope_jump,
    t_injectivity_check,
    t_surjectivity_check,
    tangential_derivative,
    theorem_consistency,
    two_intersection_check,
)
from convex_monge.geometry import ConvexCurveSpec, sample_uniform_arclength
from convex_monge.measures import DensitySpec
from convex_monge.pipeline import solve_instance
from convex_monge.transport import PotentialPair, TransportPlan, cost_matrix

CIRCLE = ConvexCurveSpec.circle(1.0)


def circle(K):
    return sample_uniform_arclength(CIRCLE, K)


def test_single_well_profile_has_two_critical_points():
    t = circle(64).params
    cps = critical_points(1 - np.cos(t))
    assert cps.count == 2
    assert [e.index for e in cps.minima] == [0] and [e.index for e in cps.maxima] == [32]


def test_double_well_profile_has_four_critical_points():
    t = circle(64).params
    cps = critical_points(1 - np.cos(2 * t))
    assert cps.count == 4
    assert len(cps.minima) == len(cps.maxima) == 2


def test_plateau_counts_once():
    values = np.array([0.0, 0.0, 0.0, 1.0, 2.0, 1.0])
    cps = critical_points(values)
    assert cps.count == 2
    assert cps.minima[0].index == 0


def test_constant_profile_is_degenerate():
    with pytest.raises(DegenerateProfileError):
        critical_points(np.full(16, 3.0))


def test_tangential_derivative_of_cosine():
    surf = circle(256)
    d = tangential_derivative(np.cos(surf.params), surf)
    np.testing.assert_allclose(d, -np.sin(surf.params), atol=surf.step**2)


def test_slope_jump_of_kink_is_resolution_independent():
    for K in (64, 128, 256):
        surf = circle(K)
        assert slope_jump(np.abs(np.sin(surf.params)), surf) == pytest.approx(2.0, rel=0.01)


def test_c1_probe_verdicts():
    coarse, fine = circle(128), circle(256)
    kink = c1_probe(np.abs(np.sin(coarse.params)), coarse, np.abs(np.sin(fine.params)), fine)
    assert kink.verdict == "kink"
    smooth = c1_probe(np.cos(coarse.params), coarse, np.cos(fine.params), fine)
    assert smooth.verdict == "smooth"
    assert smooth.ratio == pytest.approx(2.0, rel=0.01)
    flat = c1_probe(np.zeros(128), coarse, np.zeros(256), fine)
    assert flat.verdict == "smooth"


def test_graph_metric_of_split_plan():
    surf = circle(32)
    rows = np.concatenate([[0, 0], np.arange(1, 32)])
    cols = np.concatenate([[0, 16], np.arange(1, 32)])
    mass = np.full(33, 1 / 32)
    mass[:2] = 1 / 64
    plan = TransportPlan(rows, cols, mass, (32, 32))
    assert graph_support_metric(plan, surf) == pytest.approx(16.0)
    identity = TransportPlan(np.arange(32), np.arange(32), np.full(32, 1 / 32), (32, 32))
    assert graph_support_metric(identity, surf) == 0.0


@pytest.fixture(scope="module")
def concentric():
    u = DensitySpec()
    coarse = solve_instance(CIRCLE, ConvexCurveSpec.circle(2.0), u, u, 32)
    fine = solve_instance(CIRCLE, ConvexCurveSpec.circle(2.0), u, u, 64)
    return coarse, fine


def test_concentric_gamma_and_T(concentric):
    coarse, _ = concentric
    gamma = gamma_mask(coarse.potentials, coarse.cost)
    assert gamma.coverage == 1.0
    tmap = map_T(gamma, coarse.potentials, coarse.cost, coarse.surf_n)
    np.testing.assert_array_equal(tmap.assignments, (np.arange(32) + 16) % 32)
    assert t_injectivity_check(tmap).passed
    assert t_surjectivity_check(tmap, coarse.surf_n).passed


def test_injectivity_reports_collisions(concentric):
    coarse, _ = concentric
    gamma = gamma_mask(coarse.potentials, coarse.cost)
    tmap = map_T(gamma, coarse.potentials, coarse.cost, coarse.surf_n)
    tmap.assignments[1] = tmap.assignments[0]
    check = t_injectivity_check(tmap)
    assert not check.passed and check.collisions == [(0, 1)]


def test_d_line_is_the_radial_line_for_constant_potential(concentric):
    coarse, _ = concentric
    line = d_line(5, coarse.potentials.phi, coarse.surf_m)
    assert line.distance_to((0.0, 0.0)) < 1e-12
    check = two_intersection_check(5, coarse.potentials, coarse.cost, coarse.surf_m, coarse.surf_n)
    assert check.passed, check.reason


def test_report_and_consistency_on_concentric(concentric):
    report = build_report(*concentric)
    assert report.critical_count_histogram == {2: 32}
    assert report.graph_metric == 0.0
    c = theorem_consistency(report)
    assert all(c["assertions"].values())
    assert all(c["implications"].values())


def test_consistency_records_failures_without_raising(concentric):
    report = build_report(*concentric)
    report.critical_count_histogram = {2: 30, 4: 2}
    c = theorem_consistency(report)
    assert not c["assertions"]["B"]
    assert not c["implications"]["A<=>B"]


def test_gamma_mask_on_hand_built_potential():
    # phi peaked at sample 0 makes sample 0 lose every sup
    surf = circle(16)
    C = cost_matrix(surf, surf)
    phi = np.zeros(16)
    phi[0] = 10.0
    gamma = gamma_mask(PotentialPair(phi, np.zeros(16)), C)
    assert not gamma.mask[0]
    assert gamma.mask[1:].all()
