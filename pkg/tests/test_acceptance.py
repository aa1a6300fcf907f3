"""Acceptance suite: one marked group of tests per criterion.

The terminal summary lists a PASS/FAIL line for every criterion.
"""

import time

import numpy as np
import pytest

from convex_monge.config import PRESETS, preset
from convex_monge.criterion import c1_probe, critical_points, graph_support_metric
from convex_monge.experiment import emit_report, gradient_formula_errors, report_json, run_experiment
from convex_monge.geometry import ConvexCurveSpec, sample_uniform_arclength
from convex_monge.measures import DensitySpec
from convex_monge.pipeline import solve_instance
from convex_monge.transforms import box_powers, inf_transform, lipschitz_estimate, sup_transform
from convex_monge.transport import TransportPlan

crit = pytest.mark.criterion
N_RANDOM = 50


def random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(N_RANDOM):
        a1, b1, a2, b2 = rng.uniform(0.5, 2.0, size=4)
        curve_m = ConvexCurveSpec.ellipse(a1, b1, center=tuple(rng.uniform(-0.5, 0.5, 2)))
        curve_n = ConvexCurveSpec.ellipse(a2, b2, center=tuple(rng.uniform(-0.5, 0.5, 2)))
        dm = DensitySpec("cosine_bump", {"amplitude": rng.uniform(0, 1), "t0": rng.uniform(0, 2 * np.pi)})
        dn = DensitySpec("gaussian_bump", {"amplitude": rng.uniform(0, 3), "t0": rng.uniform(0, 2 * np.pi),
                                           "sigma": rng.uniform(0.3, 1.0)})
        yield solve_instance(curve_m, curve_n, dm, dn, 32)


@pytest.fixture(scope="module")
def randomized():
    return list(random_instances())


def all_instances(preset_reports, randomized):
    for rep in preset_reports.values():
        yield rep.artifacts["coarse"]
        yield rep.artifacts["fine"]
    yield from randomized


# -- 1 ---------------------------------------------------------------------

@crit(1, "duality gap <= 1e-8 (1 + |primal|) and runtime < 10 s on three presets")
@pytest.mark.parametrize("name", ["identity-circles", "concentric-circles", "ellipse-pair"])
def test_duality_gap(name):
    start = time.perf_counter()
    report = run_experiment(preset(name))
    elapsed = time.perf_counter() - start
    for key in ("solve", "solve_refined"):
        s = report.data[key]
        assert abs(s["gap"]) <= 1e-8 * (1 + abs(s["primal"]))
    assert elapsed < 10.0


# -- 2 ---------------------------------------------------------------------

def conjugacy_residual(inst):
    phi, psi, C = inst.potentials.phi, inst.potentials.psi, inst.cost
    return max(
        np.max(np.abs(phi - inf_transform(psi, C, "N->M"))),
        np.max(np.abs(psi - inf_transform(phi, C, "M->N"))),
    )


@crit(2, "conjugacy fixed point within 1e-12 on presets and 50 random 32x32 instances")
def test_conjugacy_presets(preset_reports):
    for rep in preset_reports.values():
        for inst in (rep.artifacts["coarse"], rep.artifacts["fine"]):
            assert conjugacy_residual(inst) <= 1e-12


@crit(2, "conjugacy fixed point within 1e-12 on presets and 50 random 32x32 instances")
def test_conjugacy_random(randomized):
    assert len(randomized) == N_RANDOM
    for inst in randomized:
        assert inst.cost.shape == (32, 32)
        assert conjugacy_residual(inst) <= 1e-12


# -- 3 ---------------------------------------------------------------------

@crit(3, "box calculus identities within 1e-12 and brute-force transform agreement")
def test_box_identities(preset_reports, randomized):
    count = 0
    for inst in all_instances(preset_reports, randomized):
        phi = inst.potentials.phi
        box, boxbox, boxboxbox = box_powers(phi, inst.cost, 3)
        assert np.all(boxbox <= phi + 1e-12)
        assert np.max(np.abs(boxboxbox - box)) <= 1e-12
        count += 1
    assert count == 2 * len(PRESETS) + N_RANDOM


@crit(3, "box calculus identities within 1e-12 and brute-force transform agreement")
@pytest.mark.parametrize("K", [8, 32, 64])
def test_transforms_match_brute_force(K):
    cfg = preset("ellipse-pair")
    inst = solve_instance(cfg.curve_m, cfg.curve_n, cfg.density_m, cfg.density_n, K)
    C, phi, psi = inst.cost, inst.potentials.phi, inst.potentials.psi
    brute_inf = np.array([min(C[i, j] - phi[i] for i in range(K)) for j in range(K)])
    brute_sup = np.array([max(C[i, j] - phi[i] for i in range(K)) for j in range(K)])
    brute_inf_n = np.array([min(C[i, j] - psi[j] for j in range(K)) for i in range(K)])
    brute_sup_n = np.array([max(C[i, j] - psi[j] for j in range(K)) for i in range(K)])
    np.testing.assert_array_equal(inf_transform(phi, C, "M->N"), brute_inf)
    np.testing.assert_array_equal(sup_transform(phi, C, "M->N"), brute_sup)
    np.testing.assert_array_equal(inf_transform(psi, C, "N->M"), brute_inf_n)
    np.testing.assert_array_equal(sup_transform(psi, C, "N->M"), brute_sup_n)


# -- 4 ---------------------------------------------------------------------

@crit(4, "Lipschitz constant of phi^box <= R_M + R_N + 1e-8")
def test_lipschitz_sandwich(preset_reports, randomized):
    for inst in all_instances(preset_reports, randomized):
        box = box_powers(inst.potentials.phi, inst.cost, 1)[0]
        est = lipschitz_estimate(box, inst.surf_n, inst.surf_m)
        assert est.empirical <= est.radius_bound + 1e-8


# -- 5 ---------------------------------------------------------------------

@crit(5, "concentric circles: analytic value, antipodal T, constant phi^box, smooth verdict")
def test_concentric_analytics(preset_reports):
    rep = preset_reports["concentric-circles"]
    inst = rep.artifacts["coarse"]
    c = rep.artifacts["criterion"]
    K = len(inst.surf_m)
    assert K == 128
    assert abs(inst.report.primal_value - 0.5) <= 1e-6
    assert graph_support_metric(inst.plan, inst.surf_n) <= 2.0
    assert c.critical_count_histogram == {2: K}
    assert c.gamma_coverage >= 1 - 2 / K
    tmap = c.extra["tmap"]
    np.testing.assert_array_equal(tmap.assignments, (np.arange(K) + K // 2) % K)
    assert abs(c.sign_condition_worst + 1.0) <= 1e-10
    assert np.ptp(c.extra["phi_box"]) <= 1e-10
    assert c.c1.verdict == "smooth"


# -- 6 ---------------------------------------------------------------------

@crit(6, "gradient formula within 5h at K and 2K, RMS error ratio >= 1.6 (ellipse-pair)")
def test_gradient_formula(preset_reports):
    rep = preset_reports["ellipse-pair"]
    errors = {}
    for label in ("coarse", "fine"):
        inst = rep.artifacts[label]
        err = gradient_formula_errors(inst)
        assert len(err) > len(inst.surf_n) // 2
        assert err.max() <= 5 * inst.surf_n.step
        errors[label] = np.sqrt(np.mean(err**2))
    assert errors["coarse"] / errors["fine"] >= 1.6


# -- 7 ---------------------------------------------------------------------

@crit(7, "line-membership distances shrink by >= 1.6 when K doubles (ellipse-pair)")
def test_line_membership(preset_reports):
    lines = preset_reports["ellipse-pair"].data["criterion"]["line_membership"]
    assert lines["coarse"]["rows"] > 0
    assert lines["coarse"]["max_distance"] / lines["refined"]["max_distance"] >= 1.6


# -- 8 ---------------------------------------------------------------------

@crit(8, "direct and crossed monotonicity within 1e-8 on all presets")
@pytest.mark.parametrize("name", sorted(PRESETS))
def test_monotonicity(preset_reports, name):
    m = preset_reports[name].data["monotonicity"]
    assert m["direct_worst"] >= -1e-8
    assert m["crossed_worst"] <= 1e-8


# -- 9 ---------------------------------------------------------------------

@crit(9, "phi^boxbox = phi on Gamma within 1e-10 on all presets")
@pytest.mark.parametrize("name", sorted(PRESETS))
def test_boxbox_on_gamma(preset_reports, name):
    c = preset_reports[name].artifacts["criterion"]
    inst = preset_reports[name].artifacts["coarse"]
    mask = c.extra["gamma"].mask
    assert mask.any()
    boxbox = box_powers(inst.potentials.phi, inst.cost, 2)[1]
    assert np.max(np.abs(boxbox - inst.potentials.phi)[mask]) <= 1e-10


# -- 10 --------------------------------------------------------------------

@crit(10, "negative controls: four critical points, kink verdict, split plan metric > 10")
def test_negative_controls():
    coarse = sample_uniform_arclength(ConvexCurveSpec.circle(1.0), 128)
    fine = sample_uniform_arclength(ConvexCurveSpec.circle(1.0), 256)
    assert critical_points(np.cos(2 * coarse.params)).count == 4
    probe = c1_probe(np.abs(np.sin(coarse.params)), coarse, np.abs(np.sin(fine.params)), fine)
    assert probe.verdict == "kink"
    K = 128
    rows = np.concatenate([[0, 0], np.arange(1, K)])
    cols = np.concatenate([[0, K // 2], np.arange(1, K)])
    mass = np.full(K + 1, 1 / K)
    mass[:2] = 0.5 / K
    assert graph_support_metric(TransportPlan(rows, cols, mass, (K, K)), coarse) > 10


# -- 11 --------------------------------------------------------------------

@crit(11, "exploratory preset completes with a full report in < 60 s")
def test_exploratory(tmp_path):
    start = time.perf_counter()
    report = run_experiment(preset("s1-nonuniform-exploratory"))
    emit_report(report, tmp_path)
    elapsed = time.perf_counter() - start
    assert report.data["config"]["resolution"] == 256
    for key in ("solve", "solve_refined", "potentials", "transforms", "monotonicity", "criterion",
                "consistency", "failures"):
        assert key in report.data
    assert (tmp_path / "report.json").stat().st_size > 0
    assert elapsed < 60.0


# -- 12 --------------------------------------------------------------------

@crit(12, "reruns give byte-identical machine-readable reports")
@pytest.mark.parametrize("name", sorted(PRESETS))
def test_determinism(tmp_path, preset_reports, name):
    emit_report(run_experiment(preset(name)), tmp_path / "a")
    emit_report(run_experiment(preset(name)), tmp_path / "b")
    first = (tmp_path / "a" / "report.json").read_bytes()
    assert first == (tmp_path / "b" / "report.json").read_bytes()
    assert first.decode() == report_json(preset_reports[name])
