"""Grid-level diagnostics linking the regularity of phi^box to graph support.

Every function here observes a solved discrete instance: critical points of
the profiles ``Theta_y = c(., y) - phi``, the set Gamma of points that
maximize some profile, the map T from Gamma to N, normal-sign and
line-membership checks, the support-graph metric of the plan, and a
two-resolution probe of the C1 regularity of ``phi^box``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import Line, line_intersection, normal_at, parameter_of
from .transforms import TOL_ARG, ThetaProfile, arg_set, box_powers, cyclic_runs

#: Consecutive differences below this fraction of the profile scale are flat.
PLATEAU_RTOL = 1e-11
#: Anchor sets wider than this many N grid steps make T multivalued.
TOL_FAR_STEPS = 3.0
#: C1 probe verdict thresholds on K_h / K_{h/2}.
SMOOTH_RATIO = 1.6
KINK_RATIO = 1.2
#: Below this the slope variation is treated as numerically zero.
FLAT_SLOPE_JUMP = 1e-8


class DegenerateProfileError(ValueError):
    """Raised for a constant profile, which valid potentials never produce."""


class Extremum(NamedTuple):
    index: int
    kind: str  # "min" or "max"
    value: float


@dataclass(frozen=True)
class CriticalPointList:
    anchor: int
    extrema: tuple

    @property
    def count(self):
        return len(self.extrema)

    @property
    def minima(self):
        return [e for e in self.extrema if e.kind == "min"]

    @property
    def maxima(self):
        return [e for e in self.extrema if e.kind == "max"]


def critical_points(profile, anchor=None, rtol=PLATEAU_RTOL):
    """Discrete extrema of a profile sampled on a closed curve.

    Consecutive cyclic differences are classified as rising, falling, or flat
    (``|diff| <= rtol * scale``).  Each flat run bounded by a sign change is
    one extremum, represented by its lowest sample index, so minima and
    maxima alternate around the cycle.
    """
    if isinstance(profile, ThetaProfile):
        values, anchor = profile.values, profile.anchor if anchor is None else anchor
    else:
        values = np.asarray(profile, dtype=float)
    k = len(values)
    scale = max(1.0, float(np.max(np.abs(values))))
    diff = np.roll(values, -1) - values  # diff[i] = v[i+1] - v[i]
    sign = np.where(np.abs(diff) <= rtol * scale, 0, np.sign(diff)).astype(int)
    moving = np.flatnonzero(sign)
    if len(moving) == 0:
        raise DegenerateProfileError("degenerate profile: constant to within plateau tolerance")
    extrema = []
    for pos, a in enumerate(moving):
        b = moving[(pos + 1) % len(moving)]
        if sign[a] == sign[b]:
            continue
        # samples a+1 .. b (cyclically) form the plateau between the two slopes
        span = (b - a) % k or k
        members = (a + 1 + np.arange(span)) % k
        rep = int(members.min())
        extrema.append(Extremum(rep, "max" if sign[a] > 0 else "min", float(values[rep])))
    extrema.sort(key=lambda e: e.index)
    return CriticalPointList(-1 if anchor is None else int(anchor), tuple(extrema))


def _theta_matrix(potentials, cost):
    # column j is the profile Theta_{y_j} over the M samples
    return np.asarray(cost, dtype=float) - np.asarray(potentials.phi)[:, None]


def _argmax_membership(theta, tol_arg):
    top = theta.max(axis=0)
    return np.abs(theta - top[None, :]) <= tol_arg * (1.0 + np.abs(top))[None, :]


@dataclass(frozen=True, eq=False)
class GammaReport:
    mask: np.ndarray
    coverage: float
    membership: np.ndarray  # (K_M, K_N): x_i maximizes Theta_{y_j}


def gamma_mask(potentials, cost, tol_arg=TOL_ARG):
    """Mark the M samples that maximize ``Theta_y`` for at least one sampled y."""
    membership = _argmax_membership(_theta_matrix(potentials, cost), tol_arg)
    mask = membership.any(axis=1)
    return GammaReport(mask, float(mask.mean()), membership)


@dataclass(frozen=True, eq=False)
class TMapEstimate:
    """``assignments[i]`` is the N index of T(x_i), or -1 off Gamma / on conflicts."""

    assignments: np.ndarray
    conflicts: list

    @property
    def assigned(self):
        return np.flatnonzero(self.assignments >= 0)


def map_T(gamma, potentials, cost, surf_n, tol_far=None):
    """Estimate T on Gamma from the maximizing anchors of each member.

    An x whose maximizing anchors spread over more than ``tol_far`` of
    arclength on N (default three grid steps) is a conflict and stays
    unassigned.  Otherwise T(x) is the anchor with the largest
    ``Theta_y(x)``, lowest index on ties.
    """
    if tol_far is None:
        tol_far = TOL_FAR_STEPS * surf_n.step
    theta = _theta_matrix(potentials, cost)
    assignments = np.full(len(gamma.mask), -1, dtype=int)
    conflicts = []
    for i in np.flatnonzero(gamma.mask):
        anchors = np.flatnonzero(gamma.membership[i])
        if surf_n.arc_diameter(anchors) > tol_far:
            conflicts.append(int(i))
            continue
        assignments[i] = int(anchors[np.argmax(theta[i, anchors])])
    return TMapEstimate(assignments, conflicts)


class InjectivityCheck(NamedTuple):
    passed: bool
    collisions: list


def t_injectivity_check(tmap):
    """Distinct Gamma members must not share an anchor."""
    by_anchor = {}
    for i in tmap.assigned:
        by_anchor.setdefault(int(tmap.assignments[i]), []).append(int(i))
    collisions = []
    for group in by_anchor.values():
        collisions.extend((group[a], group[b]) for a in range(len(group)) for b in range(a + 1, len(group)))
    return InjectivityCheck(not collisions, collisions)


class SurjectivityCheck(NamedTuple):
    passed: bool
    uncovered: list  # runs of N indices farther than one step from any anchor


def t_surjectivity_check(tmap, surf_n):
    hit = np.unique(tmap.assignments[tmap.assignments >= 0])
    if len(hit) == 0:
        return SurjectivityCheck(False, [list(range(len(surf_n)))])
    gap = surf_n.arc_distance(np.arange(len(surf_n))[:, None], hit[None, :]).min(axis=1)
    far = np.flatnonzero(gap > surf_n.step * (1 + 1e-9))
    runs = [r.tolist() for r in cyclic_runs(far, len(surf_n))]
    return SurjectivityCheck(not runs, runs)


def normal_sign_check(tmap, surf_m, surf_n):
    """Largest ``n_M(x) . n_N(T(x))`` over assigned points (negative is expected)."""
    i = tmap.assigned
    if len(i) == 0:
        return float("nan")
    dots = np.sum(surf_m.normals[i] * surf_n.normals[tmap.assignments[i]], axis=1)
    return float(dots.max())


def tangential_derivative(values, surf):
    """Centered finite difference of a sampled function along arclength."""
    values = np.asarray(values, dtype=float)
    s = surf.arclength
    ahead = np.roll(s, -1)
    ahead[-1] += surf.perimeter
    behind = np.roll(s, 1)
    behind[0] -= surf.perimeter
    return (np.roll(values, -1) - np.roll(values, 1)) / (ahead - behind)


def d_line(index, potential, surf):
    """The line ``x - grad(potential)(x) + span(n(x))`` at a sample.

    Only the tangential derivative is available on the grid; the normal part
    of an ambient gradient moves the base point along the line itself, so
    the line is the same.
    """
    g = tangential_derivative(potential, surf)[index]
    tau = surf.tangents[index]
    return Line(surf.points[index] - g * tau, surf.normals[index])


class LineMembership(NamedTuple):
    distances: np.ndarray  # one row per (anchor, critical index, kind code)
    max_distance: float
    step: float


def d_line_membership(potentials, cost, surf_m, surf_n, anchors=None, side="on_M"):
    """Distance from each anchor to the D-lines of its profile's critical points.

    With ``side="on_M"`` the anchors are N samples y, the profile is
    ``Theta_y`` on M and the lines are ``D_x`` built from ``phi``.  With
    ``side="on_N"`` the roles of the surfaces (and of ``psi``) are swapped.
    """
    if side == "on_M":
        own, other, potential = surf_m, surf_n, potentials.phi
        theta = np.asarray(cost) - np.asarray(potentials.phi)[:, None]
    else:
        own, other, potential = surf_n, surf_m, potentials.psi
        theta = (np.asarray(cost) - np.asarray(potentials.psi)[None, :]).T
    if anchors is None:
        anchors = range(theta.shape[1])
    g = tangential_derivative(potential, own)
    base = own.points - g[:, None] * own.tangents
    rows = []
    for j in anchors:
        for e in critical_points(theta[:, j], anchor=j).extrema:
            diff = other.points[j] - base[e.index]
            along = diff @ own.normals[e.index]
            dist = float(np.linalg.norm(diff - along * own.normals[e.index]))
            rows.append((j, e.index, 1.0 if e.kind == "max" else -1.0, dist))
    table = np.array(rows, dtype=float).reshape(-1, 4)
    worst = float(table[:, 3].max()) if len(table) else 0.0
    return LineMembership(table, worst, own.step)


class TwoIntersection(NamedTuple):
    passed: bool
    reason: str
    points: np.ndarray
    signs: tuple


def two_intersection_check(index, potentials, cost, surf_m, surf_n, tol_steps=2.0):
    """The line D_x for x in Gamma meets N twice, at a maximizing and a minimizing anchor.

    The anchor with ``n_M(x) . n_N(y) < 0`` must have x (within ``tol_steps``
    M grid steps) among the maxima of its profile; the one with a positive
    dot product must have x among the minima.
    """
    line = d_line(index, potentials.phi, surf_m)
    pts = line_intersection(line, surf_n.curve, tol=1e-9)
    if len(pts) < 2:
        return TwoIntersection(False, "tangency or exterior line", pts, ())
    n_x = surf_m.normals[index]
    signs = tuple(float(n_x @ normal_at(surf_n.curve, parameter_of(surf_n.curve, p))) for p in pts)
    if not (min(signs) < 0 < max(signs)):
        return TwoIntersection(False, "normal signs do not split", pts, signs)
    theta = _theta_matrix(potentials, cost)
    radius = tol_steps * surf_m.step * (1 + 1e-9)
    for p, sgn in zip(pts, signs):
        j = int(np.argmin(np.linalg.norm(surf_n.points - p, axis=1)))
        kind = "argmax" if sgn < 0 else "argmin"
        ext = arg_set(theta[:, j], kind).indices
        if surf_m.arc_distance(index, ext).min() > radius:
            return TwoIntersection(False, f"x is not near the {kind} of the profile at y_{j}", pts, signs)
    return TwoIntersection(True, "", pts, signs)


def graph_support_metric(plan, surf_n, tol=1e-14):
    """Widest arclength spread on N of the targets of a single source, in N grid steps."""
    keep = plan.mass >= tol
    rows, cols = plan.rows[keep], plan.cols[keep]
    worst = 0.0
    for i in np.unique(rows):
        worst = max(worst, surf_n.arc_diameter(cols[rows == i]))
    return worst / surf_n.step


class C1Probe(NamedTuple):
    k_h: float
    k_h2: float
    ratio: float
    verdict: str


def slope_jump(values, surf):
    """Largest jump between consecutive one-sided slopes along a closed grid."""
    values = np.asarray(values, dtype=float)
    ds = np.diff(np.append(surf.arclength, surf.perimeter))
    g = (np.roll(values, -1) - values) / ds
    return float(np.max(np.abs(np.roll(g, -1) - g)))


def c1_probe(phi_box_coarse, surf_coarse, phi_box_fine, surf_fine):
    """Compare slope jumps of ``phi^box`` at two resolutions.

    Second differences of a C1 function with bounded curvature halve with
    the grid step while a kink keeps a fixed slope jump, so the ratio tends
    to 2 (or the refinement factor) for smooth data and to 1 at a kink.
    """
    k_h = slope_jump(phi_box_coarse, surf_coarse)
    k_h2 = slope_jump(phi_box_fine, surf_fine)
    ratio = k_h / k_h2 if k_h2 > 0 else float("inf")
    if max(k_h, k_h2) <= FLAT_SLOPE_JUMP:
        verdict = "smooth"
    elif ratio >= SMOOTH_RATIO:
        verdict = "smooth"
    elif ratio <= KINK_RATIO:
        verdict = "kink"
    else:
        verdict = "inconclusive"
    return C1Probe(k_h, k_h2, ratio, verdict)


class CrossedMonotonicity(NamedTuple):
    passed: bool
    worst: float


def crossed_monotonicity_check(potentials, cost, surf_m, surf_n, tol=1e-8, tol_arg=TOL_ARG):
    """``(x - x') . (y - y') <= tol`` for x in Omega_{y'} and x' in Omega_y.

    The equality pairs come from the argmin sets of every profile ``Theta_y``.
    """
    theta = np.asarray(cost) - np.asarray(potentials.phi)[:, None]
    low = theta.min(axis=0)
    member = np.abs(theta - low[None, :]) <= tol_arg * (1.0 + np.abs(low))[None, :]
    xi, yj = np.nonzero(member)
    x = surf_m.points[xi]
    y = surf_n.points[yj]
    # pair a = (x, y'), pair b = (x', y): value (x_a - x_b) . (y_b - y_a)
    xy = x @ y.T
    d = np.diag(xy)
    table = xy + xy.T - d[:, None] - d[None, :]
    worst = float(table.max()) if len(table) else 0.0
    return CrossedMonotonicity(worst <= tol, worst)


@dataclass
class CriterionReport:
    critical_count_histogram: dict
    gamma_coverage: float
    t_injective: bool
    t_collisions: list
    t_surjective: bool
    t_uncovered: list
    t_conflicts: list
    sign_condition_worst: float
    graph_metric: float
    c1: C1Probe
    box_equals_on_gamma: float
    extra: dict = field(default_factory=dict)


def build_report(coarse, fine, tol_arg=TOL_ARG, far_steps=TOL_FAR_STEPS):
    """Run every diagnostic on a solved instance and its refinement.

    ``coarse`` and ``fine`` need ``surf_m``, ``surf_n``, ``cost``, ``plan``
    and ``potentials`` attributes (see :class:`convex_monge.pipeline.SolvedInstance`).
    """
    pot, cost = coarse.potentials, coarse.cost
    theta = _theta_matrix(pot, cost)
    histogram = {}
    for j in range(theta.shape[1]):
        n = critical_points(theta[:, j], anchor=j).count
        histogram[n] = histogram.get(n, 0) + 1
    gamma = gamma_mask(pot, cost, tol_arg)
    tmap = map_T(gamma, pot, cost, coarse.surf_n, far_steps * coarse.surf_n.step)
    inj = t_injectivity_check(tmap)
    surj = t_surjectivity_check(tmap, coarse.surf_n)
    box, boxbox = box_powers(pot.phi, cost, 2)
    on_gamma = np.abs(boxbox - pot.phi)[gamma.mask]
    box_fine = box_powers(fine.potentials.phi, fine.cost, 1)[0]
    return CriterionReport(
        critical_count_histogram=dict(sorted(histogram.items())),
        gamma_coverage=gamma.coverage,
        t_injective=inj.passed,
        t_collisions=inj.collisions,
        t_surjective=surj.passed,
        t_uncovered=surj.uncovered,
        t_conflicts=tmap.conflicts,
        sign_condition_worst=normal_sign_check(tmap, coarse.surf_m, coarse.surf_n),
        graph_metric=graph_support_metric(coarse.plan, coarse.surf_n),
        c1=c1_probe(box, coarse.surf_n, box_fine, fine.surf_n),
        box_equals_on_gamma=float(on_gamma.max()) if len(on_gamma) else 0.0,
        extra={"gamma": gamma, "tmap": tmap, "phi_box": box},
    )


def theorem_consistency(report, graph_steps=2.0, gamma_slack=None):
    """Record which assertions hold on this instance and whether their links agree.

    Letters: A smooth C1 verdict, B every profile has exactly two critical
    points, C T injective, D Gamma covers M, E graph-supported plan,
    F ``phi^boxbox == phi`` on Gamma.  Nothing is asserted; the returned
    dict says which implications are observed to hold.
    """
    k_total = sum(report.critical_count_histogram.values())
    slack = gamma_slack if gamma_slack is not None else 2.0 / max(k_total, 1)
    A = report.c1.verdict == "smooth"
    B = set(report.critical_count_histogram) == {2}
    C = report.t_injective
    D = report.gamma_coverage >= 1.0 - slack
    E = report.graph_metric <= graph_steps
    F = report.box_equals_on_gamma <= 1e-10
    single_omega = not report.t_conflicts
    return {
        "assertions": {"A": A, "B": B, "C": C, "D": D, "E": E, "F": F},
        "implications": {
            "A<=>B": A == B,
            "B<=>C": B == C,
            "A<=>C": A == C,
            "(A|B|C)=>D": (not (A or B or C)) or D,
            "D&single_omega=>E": (not (D and single_omega)) or E,
            "Gamma=>F": F,
        },
    }
