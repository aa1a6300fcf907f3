"""Conjugate transforms of discrete potentials under the quadratic cost.

All transforms are exhaustive O(K_M K_N) scans over a dense cost matrix
``cost[i, j] = c(x_i, y_j)``.  ``direction`` names the surface the input
lives on and the one the output lives on: ``"M->N"`` takes a potential on
the rows and returns one on the columns, ``"N->M"`` the reverse.

The inf-transform ``eta*`` is the usual c-transform; the sup-transform
``eta^box`` replaces the infimum by a supremum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import tangent_projection

DIRECTIONS = ("M->N", "N->M")

#: Relative tolerance for membership in an argmin / argmax set.
TOL_ARG = 1e-9


def _oriented(eta, cost, direction):
    eta = np.asarray(eta, dtype=float)
    cost = np.asarray(cost, dtype=float)
    if direction == "M->N":
        if eta.shape != (cost.shape[0],):
            raise ValueError(f"potential of length {eta.shape} does not match {cost.shape[0]} rows")
        return cost - eta[:, None]
    if direction == "N->M":
        if eta.shape != (cost.shape[1],):
            raise ValueError(f"potential of length {eta.shape} does not match {cost.shape[1]} columns")
        return (cost - eta[None, :]).T
    raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def inf_transform(eta, cost, direction="M->N"):
    """``result_j = min_i (cost_ij - eta_i)`` (or the transposed scan)."""
    return _oriented(eta, cost, direction).min(axis=0)


def sup_transform(eta, cost, direction="M->N"):
    """``result_j = max_i (cost_ij - eta_i)`` (or the transposed scan)."""
    return _oriented(eta, cost, direction).max(axis=0)


def _flip(direction):
    return "N->M" if direction == "M->N" else "M->N"


def box_powers(phi, cost, times=3):
    """Return ``[phi^box, phi^boxbox, ...]`` up to ``times`` applications."""
    out = []
    current, direction = np.asarray(phi, dtype=float), "M->N"
    for _ in range(times):
        current = sup_transform(current, cost, direction)
        out.append(current)
        direction = _flip(direction)
    return out


@dataclass(frozen=True, eq=False)
class ThetaProfile:
    """``values[i] = c(x_i, y_anchor) - phi_i`` on M, or the mirror on N."""

    anchor: int
    values: np.ndarray
    side: str

    def __post_init__(self):
        if self.side not in ("on_M", "on_N"):
            raise ValueError("side must be 'on_M' or 'on_N'")

    def __len__(self):
        return len(self.values)


def theta_profile(anchor, side, potentials, cost):
    """Profile of ``c(., y) - phi`` over M (``side="on_M"``, anchor in N)
    or ``c(x, .) - psi`` over N (``side="on_N"``, anchor in M)."""
    cost = np.asarray(cost, dtype=float)
    if side == "on_M":
        values = cost[:, anchor] - potentials.phi
    elif side == "on_N":
        values = cost[anchor, :] - potentials.psi
    else:
        raise ValueError("side must be 'on_M' or 'on_N'")
    return ThetaProfile(int(anchor), np.asarray(values, dtype=float), side)


@dataclass(frozen=True, eq=False)
class ArgSet:
    """Indices attaining an extremum, grouped into cyclic plateau clusters.

    ``clusters`` holds one array of indices per run of cyclically adjacent
    members; ``representatives`` is the lowest index of each run.
    """

    indices: np.ndarray
    extreme_value: float
    kind: str
    clusters: list = field(default_factory=list)
    degenerate: bool = False

    @property
    def representatives(self):
        return [int(c.min()) for c in self.clusters]

    def __contains__(self, i):
        return bool(np.any(self.indices == i))

    def __len__(self):
        return len(self.indices)


def cyclic_runs(indices, size):
    """Split sorted indices on a cycle of length ``size`` into adjacent runs."""
    idx = np.sort(np.asarray(indices, dtype=int))
    if len(idx) == 0:
        return []
    if len(idx) == size:
        return [idx]
    breaks = np.flatnonzero(np.diff(idx) > 1) + 1
    runs = np.split(idx, breaks)
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == size - 1:
        runs[0] = np.concatenate([runs[-1], runs[0]])
        runs.pop()
    return runs


def arg_set(profile, kind="argmin", tol_arg=TOL_ARG):
    values = profile.values if isinstance(profile, ThetaProfile) else np.asarray(profile, dtype=float)
    if kind == "argmin":
        ext = float(values.min())
    elif kind == "argmax":
        ext = float(values.max())
    else:
        raise ValueError("kind must be 'argmin' or 'argmax'")
    tol = tol_arg * (1.0 + abs(ext))
    idx = np.flatnonzero(np.abs(values - ext) <= tol)
    return ArgSet(
        indices=idx,
        extreme_value=ext,
        kind=kind,
        clusters=cyclic_runs(idx, len(values)),
        degenerate=len(idx) == len(values),
    )


class BoxInequality(NamedTuple):
    passed: bool
    worst_margin: float
    equality: np.ndarray  # boolean (K_M, K_N): phi_i + phibox_j == c_ij


def check_box_inequality(phi, phi_box, cost, tol_arg=TOL_ARG):
    """``phi_i + phibox_j >= c_ij`` everywhere, with equality on the argmax sets."""
    cost = np.asarray(cost, dtype=float)
    slack = np.asarray(phi)[:, None] + np.asarray(phi_box)[None, :] - cost
    worst = float(slack.min())
    scale = 1.0 + np.abs(np.asarray(phi_box))[None, :]
    return BoxInequality(worst >= -1e-10, worst, np.abs(slack) <= tol_arg * scale)


class BoxBoxCheck(NamedTuple):
    passed: bool
    worst_boxbox_excess: float
    worst_triple_deviation: float


def check_boxbox_bounds(phi, cost, tol=1e-12):
    """phi^boxbox <= phi pointwise and phi^boxboxbox == phi^box."""
    box, boxbox, boxboxbox = box_powers(phi, cost, 3)
    excess = float(np.max(boxbox - np.asarray(phi)))
    triple = float(np.max(np.abs(boxboxbox - box)))
    return BoxBoxCheck(excess <= tol and triple <= tol, excess, triple)


class LipschitzEstimate(NamedTuple):
    empirical: float
    bound: float
    radius_bound: float

    @property
    def holds(self):
        return self.empirical <= self.bound + 1e-8 and self.bound <= self.radius_bound + 1e-12


def lipschitz_estimate(phi_box, surf_n, surf_m):
    """Empirical Lipschitz constant of ``phi_box`` between adjacent samples on N.

    ``bound`` is the largest ``|z + y - 2x| / 2`` over adjacent ``(y, z)`` and
    all ``x`` in M; ``radius_bound`` is ``R_N + R_M`` with ``R`` the largest
    sample norm.
    """
    y = surf_n.points
    z = np.roll(y, -1, axis=0)
    vals = np.asarray(phi_box, dtype=float)
    chord = np.linalg.norm(z - y, axis=1)
    empirical = float(np.max(np.abs(np.roll(vals, -1) - vals) / chord))
    mid = 0.5 * (z + y)
    # max_x |mid - x| over the M samples, for every adjacent pair
    d = np.linalg.norm(mid[:, None, :] - surf_m.points[None, :, :], axis=2)
    bound = float(d.max())
    return LipschitzEstimate(empirical, bound, surf_n.max_norm + surf_m.max_norm)


def box_gradient(y_index, phi, surf_m, surf_n, cost, tol_arg=TOL_ARG):
    """Tangential gradient of ``phi^box`` at ``y`` from its unique maximizer.

    Returns ``P_y(y - x)`` when the sup defining ``phi^box(y)`` is attained
    at a single sample ``x``, and ``None`` when the maximizer is not unique.
    """
    values = np.asarray(cost, dtype=float)[:, y_index] - np.asarray(phi)
    argmax = arg_set(values, "argmax", tol_arg)
    if len(argmax) != 1:
        return None
    x = surf_m.points[argmax.indices[0]]
    y = surf_n.points[y_index]
    return tangent_projection(surf_n.normals[y_index], y - x)
