"""Run the full pipeline on one configuration and serialize the results."""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .criterion import (
    DegenerateProfileError,
    build_report,
    crossed_monotonicity_check,
    d_line_membership,
    tangential_derivative,
    theorem_consistency,
)
from .pipeline import solve_instance
from .transforms import box_gradient, box_powers, check_box_inequality, inf_transform, lipschitz_estimate
from .transport import TransportError, cyclical_monotonicity_check

log = logging.getLogger(__name__)

GAP_RTOL = 1e-8
CONJUGACY_TOL = 1e-12
BOX_TOL = 1e-12
RANDOM_BATTERY_SIZE = 5


@dataclass
class Report:
    """Result of one experiment.

    ``data`` is the deterministic machine-readable document; ``timings``
    holds wall-clock measurements, kept apart so reruns are byte-identical.
    ``artifacts`` carries in-memory arrays for plotting and is never written.
    """

    data: dict
    timings: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    @property
    def failures(self):
        return self.data.get("failures", [])

    @property
    def ok(self):
        return not self.failures


def _conjugacy(potentials, cost):
    phi, psi = potentials.phi, potentials.psi
    return {
        "phi_vs_psi_star": float(np.max(np.abs(phi - inf_transform(psi, cost, "N->M")))),
        "psi_vs_phi_star": float(np.max(np.abs(psi - inf_transform(phi, cost, "M->N")))),
    }


def _box(phi, cost):
    box, boxbox, boxboxbox = box_powers(phi, cost, 3)
    return {
        "boxbox_minus_phi_max": float(np.max(boxbox - phi)),
        "triple_minus_box_max": float(np.max(np.abs(boxboxbox - box))),
    }


def gradient_formula_errors(inst):
    """Pointwise gap between the finite-difference slope of phi^box and P_y(y - x) . tau."""
    phi = inst.potentials.phi
    box = box_powers(phi, inst.cost, 1)[0]
    fd = tangential_derivative(box, inst.surf_n)
    tangents = inst.surf_n.tangents
    errors = []
    for j in range(len(inst.surf_n)):
        v = box_gradient(j, phi, inst.surf_m, inst.surf_n, inst.cost)
        if v is not None:
            errors.append(abs(fd[j] - float(v @ tangents[j])))
    return np.asarray(errors)


def _solve_summary(inst):
    rep = inst.report
    return {
        "resolution": len(inst.surf_m),
        "primal": rep.primal_value,
        "dual": rep.dual_value,
        "gap": rep.gap,
        "iterations": rep.iterations,
        "support_size": len(rep.support),
        "marginal_error": float(
            max(
                np.abs(inst.plan.row_marginal - inst.mu.masses).max(),
                np.abs(inst.plan.col_marginal - inst.nu.masses).max(),
            )
        ),
        "dual_feasibility_violation": inst.potentials.max_violation(inst.cost),
    }


def _random_box_battery(cost, seed):
    rng = np.random.default_rng(seed)
    worst_excess, worst_triple = -math.inf, 0.0
    for _ in range(RANDOM_BATTERY_SIZE):
        phi = rng.normal(scale=float(np.std(cost)) + 1.0, size=cost.shape[0])
        b = _box(phi, cost)
        worst_excess = max(worst_excess, b["boxbox_minus_phi_max"])
        worst_triple = max(worst_triple, b["triple_minus_box_max"])
    return {"seed": seed, "count": RANDOM_BATTERY_SIZE, "boxbox_minus_phi_max": worst_excess,
            "triple_minus_box_max": worst_triple}


def run_experiment(config, seed=0):
    """Solve at ``K`` and ``refinement * K`` and run every check.

    Hard invariants (duality gap, conjugacy identities, box identities) that
    fail are listed under ``failures``; solver errors and degenerate
    profiles are reported there as well instead of being raised.
    """
    timings = {}
    data = {
        "tool": {"name": "convex-monge", "version": __version__},
        "config": config.to_dict(),
        "seed": seed,
    }
    failures = []
    artifacts = {"config": config}
    K = config.resolution
    tol = config.tolerances
    t0 = time.perf_counter()
    try:
        coarse = solve_instance(config.curve_m, config.curve_n, config.density_m, config.density_n, K)
        timings["solve"] = time.perf_counter() - t0
        t1 = time.perf_counter()
        fine = solve_instance(
            config.curve_m, config.curve_n, config.density_m, config.density_n, K * config.refinement
        )
        timings["solve_refined"] = time.perf_counter() - t1
    except TransportError as exc:
        data["failures"] = [{"invariant": "solver", "detail": str(exc)}]
        return Report(data, timings, artifacts)
    artifacts.update(coarse=coarse, fine=fine)

    data["solve"] = _solve_summary(coarse)
    data["solve_refined"] = _solve_summary(fine)
    phi, psi = coarse.potentials.phi, coarse.potentials.psi
    data["potentials"] = {
        "anchor": coarse.potentials.anchor,
        "phi_min": float(phi.min()),
        "phi_max": float(phi.max()),
        "psi_min": float(psi.min()),
        "psi_max": float(psi.max()),
    }

    t2 = time.perf_counter()
    transforms = {}
    for label, inst in (("coarse", coarse), ("refined", fine)):
        transforms[label] = {
            "conjugacy": _conjugacy(inst.potentials, inst.cost),
            "box": _box(inst.potentials.phi, inst.cost),
        }
        gap = inst.report.gap
        if not gap <= GAP_RTOL * (1 + abs(inst.report.primal_value)) or gap < -1e-10:
            failures.append({"invariant": "duality_gap", "instance": label, "value": gap})
        conj = transforms[label]["conjugacy"]
        if max(conj.values()) > CONJUGACY_TOL:
            failures.append({"invariant": "conjugacy", "instance": label, "value": max(conj.values())})
        box = transforms[label]["box"]
        if box["boxbox_minus_phi_max"] > BOX_TOL or box["triple_minus_box_max"] > BOX_TOL:
            failures.append({"invariant": "box_identities", "instance": label, "value": box})

    box_coarse = box_powers(phi, coarse.cost, 1)[0]
    lip = lipschitz_estimate(box_coarse, coarse.surf_n, coarse.surf_m)
    ineq = check_box_inequality(phi, box_coarse, coarse.cost)
    transforms["box_inequality_worst_margin"] = ineq.worst_margin
    transforms["lipschitz"] = {"empirical": lip.empirical, "bound": lip.bound, "radius_bound": lip.radius_bound,
                               "holds": lip.holds}
    grad = {}
    for label, inst in (("coarse", coarse), ("refined", fine)):
        err = gradient_formula_errors(inst)
        grad[label] = {
            "checked": int(len(err)),
            "max_error": float(err.max()) if len(err) else 0.0,
            "rms_error": float(np.sqrt(np.mean(err**2))) if len(err) else 0.0,
            "step": inst.surf_n.step,
        }
    transforms["gradient_formula"] = grad
    transforms["random_box_battery"] = _random_box_battery(coarse.cost, seed)
    data["transforms"] = transforms

    mono = cyclical_monotonicity_check(coarse.report.support, coarse.surf_m, coarse.surf_n)
    crossed = crossed_monotonicity_check(coarse.potentials, coarse.cost, coarse.surf_m, coarse.surf_n,
                                         tol_arg=tol["arg"])
    data["monotonicity"] = {"direct_worst": mono.worst, "direct_passed": mono.passed,
                            "crossed_worst": crossed.worst, "crossed_passed": crossed.passed}
    timings["transforms"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    try:
        crit = build_report(coarse, fine, tol_arg=tol["arg"], far_steps=tol["far_steps"])
        lines = {}
        for label, inst in (("coarse", coarse), ("refined", fine)):
            lm = d_line_membership(inst.potentials, inst.cost, inst.surf_m, inst.surf_n)
            lines[label] = {"max_distance": lm.max_distance, "step": lm.step, "rows": int(len(lm.distances))}
    except DegenerateProfileError as exc:
        failures.append({"invariant": "degenerate_profile", "detail": str(exc)})
        data["failures"] = failures
        return Report(data, timings, artifacts)
    timings["criterion"] = time.perf_counter() - t3
    artifacts["criterion"] = crit
    data["criterion"] = {
        "critical_count_histogram": {str(k): v for k, v in crit.critical_count_histogram.items()},
        "gamma_coverage": crit.gamma_coverage,
        "t_injective": crit.t_injective,
        "t_collisions": [list(p) for p in crit.t_collisions],
        "t_surjective": crit.t_surjective,
        "t_uncovered": crit.t_uncovered,
        "t_conflicts": crit.t_conflicts,
        "sign_condition_worst": crit.sign_condition_worst,
        "graph_metric": crit.graph_metric,
        "c1": crit.c1._asdict(),
        "box_equals_on_gamma": crit.box_equals_on_gamma,
        "line_membership": lines,
    }
    data["consistency"] = theorem_consistency(crit, graph_steps=tol["graph_steps"])
    data["failures"] = failures
    return Report(_clean(data), timings, artifacts)


def _clean(obj):
    """Convert numpy scalars and non-finite floats to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def report_json(report):
    return json.dumps(_clean(report.data), indent=2) + "\n"


def report_text(report):
    d = report.data
    cfg = d["config"]
    out = [f"experiment {cfg['name']}  (K={cfg['resolution']}, refinement x{cfg['refinement']})"]
    if "solve" in d:
        s = d["solve"]
        out.append(f"  transport cost {s['primal']:.12g}  gap {s['gap']:.3e}  pivots {s['iterations']}"
                   f"  support {s['support_size']}")
    if "transforms" in d:
        t = d["transforms"]["coarse"]
        out.append(f"  conjugacy residual {max(t['conjugacy'].values()):.3e}"
                   f"  box residuals {t['box']['boxbox_minus_phi_max']:.3e} / {t['box']['triple_minus_box_max']:.3e}")
    if "criterion" in d:
        c = d["criterion"]
        out.append(f"  critical counts {c['critical_count_histogram']}  Gamma coverage {c['gamma_coverage']:.4f}")
        out.append(f"  T injective {c['t_injective']}  surjective {c['t_surjective']}"
                   f"  worst n_M.n_N {c['sign_condition_worst']:.6f}")
        out.append(f"  graph metric {c['graph_metric']:.3f} steps  C1 verdict {c['c1']['verdict']}"
                   f" (ratio {c['c1']['ratio']})")
    if "consistency" in d:
        held = "".join(k for k, v in d["consistency"]["assertions"].items() if v)
        out.append(f"  assertions holding: {held or 'none'}")
    if report.timings:
        out.append("  timings: " + ", ".join(f"{k} {v:.2f}s" for k, v in report.timings.items()))
    fails = d.get("failures", [])
    out.append("  failures: " + (", ".join(f["invariant"] for f in fails) if fails else "none"))
    return "\n".join(out) + "\n"


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(report, path):
    """Write ``report.json``, ``report.txt`` and ``timings.json`` into directory ``path``."""
    path = Path(path)
    _atomic_write(path / "report.json", report_json(report))
    _atomic_write(path / "report.txt", report_text(report))
    _atomic_write(path / "timings.json", json.dumps(report.timings, indent=2) + "\n")
    return path / "report.json"


def load_report(path):
    return json.loads(Path(path).read_text())


def profile_anchors(K, count=4):
    return sorted({int(round(q * K / count)) % K for q in range(count)})


def emit_profiles(report, path, anchors=None):
    """Tabular Theta_y profiles: one row per (anchor, sample) with t and the value."""
    inst = report.artifacts["coarse"]
    K = len(inst.surf_n)
    anchors = profile_anchors(K) if anchors is None else anchors
    rows = ["anchor\tt\ttheta"]
    for j in anchors:
        theta = inst.cost[:, j] - inst.potentials.phi
        rows.extend(f"{j}\t{t!r}\t{v!r}" for t, v in zip(inst.surf_m.params.tolist(), theta.tolist()))
    _atomic_write(Path(path) / "profiles.tsv", "\n".join(rows) + "\n")
    return Path(path) / "profiles.tsv"
