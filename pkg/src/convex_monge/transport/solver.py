"""Exact discrete Kantorovich solver and dual-potential utilities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..transforms import inf_transform
from ._simplex import STATUS_OPTIMAL, network_simplex

#: Basis entries lighter than this are degeneracy artifacts, not support.
SUPPORT_TOL = 1e-14


class TransportError(RuntimeError):
    pass


class UnbalancedMarginalsError(TransportError, ValueError):
    pass


class SolverIterationError(TransportError):
    def __init__(self, iterations, reduced_cost, shape):
        super().__init__(
            f"network simplex hit the iteration cap ({iterations}) on a {shape[0]}x{shape[1]}"
            f" problem; most negative reduced cost {reduced_cost:.3e}"
        )
        self.iterations = iterations
        self.reduced_cost = reduced_cost


def cost_matrix(surf_m, surf_n):
    """Dense quadratic cost ``c_ij = |x_i - y_j|^2 / 2``."""
    x = np.asarray(getattr(surf_m, "points", surf_m), dtype=float)
    y = np.asarray(getattr(surf_n, "points", surf_n), dtype=float)
    diff = x[:, None, :] - y[None, :, :]
    return 0.5 * np.einsum("ijk,ijk->ij", diff, diff)


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Sparse coupling with strictly positive entries."""

    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray
    shape: tuple

    def __post_init__(self):
        if np.any(self.mass <= 0):
            raise ValueError("plan entries must be strictly positive")

    def __len__(self):
        return len(self.mass)

    @property
    def entries(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.mass.tolist()))

    @property
    def row_marginal(self):
        return np.bincount(self.rows, weights=self.mass, minlength=self.shape[0])

    @property
    def col_marginal(self):
        return np.bincount(self.cols, weights=self.mass, minlength=self.shape[1])

    def todense(self):
        out = np.zeros(self.shape)
        np.add.at(out, (self.rows, self.cols), self.mass)
        return out

    def cost(self, cost):
        return float(np.sum(self.mass * np.asarray(cost)[self.rows, self.cols]))

    @classmethod
    def from_dense(cls, matrix):
        matrix = np.asarray(matrix, dtype=float)
        rows, cols = np.nonzero(matrix > 0)
        return cls(rows, cols, matrix[rows, cols], matrix.shape)


@dataclass(frozen=True, eq=False)
class PotentialPair:
    """Discrete potentials ``phi`` on the M samples and ``psi`` on the N samples.

    ``anchor`` is the M index whose ``phi`` value is pinned to zero when the
    pair is normalized.
    """

    phi: np.ndarray
    psi: np.ndarray
    anchor: int = 0

    def dual_value(self, mu_masses, nu_masses):
        return float(np.dot(mu_masses, self.phi) + np.dot(nu_masses, self.psi))

    def max_violation(self, cost):
        """Largest amount by which ``phi_i + psi_j`` exceeds ``c_ij``."""
        return float(np.max(self.phi[:, None] + self.psi[None, :] - cost))


class SolveReport(NamedTuple):
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    support: list


def _masses(measure):
    return np.asarray(getattr(measure, "masses", measure), dtype=float)


def solve_kantorovich(mu, nu, cost, max_iter=None):
    """Exact optimal coupling and tight dual potentials.

    Parameters
    ----------
    mu, nu : DiscreteMeasure or array_like
        Source and target masses, each summing to one.
    cost : ndarray, shape (K_M, K_N)
    max_iter : int, optional
        Pivot cap for the network simplex; defaults to ``50 * K_M * K_N``.

    Returns
    -------
    plan : TransportPlan
    potentials : PotentialPair
        Tightened (mutual inf-transforms) and anchored at the first
        positive-mass source.
    report : SolveReport

    Notes
    -----
    Zero-mass atoms are removed before the LP and receive potentials from
    the conjugate transforms afterwards.  Among all optimal duals the solver
    returns the midpoint between the largest and smallest anchored ``phi``
    on the optimal face, which does not depend on which degenerate arcs the
    simplex happened to keep in its final basis.
    """
    a_full = _masses(mu)
    b_full = _masses(nu)
    cost = np.ascontiguousarray(cost, dtype=float)
    if cost.shape != (len(a_full), len(b_full)):
        raise ValueError(f"cost shape {cost.shape} does not match marginals ({len(a_full)}, {len(b_full)})")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost must be finite")
    if np.any(a_full < 0) or np.any(b_full < 0):
        raise UnbalancedMarginalsError("masses must be nonnegative")
    if abs(a_full.sum() - 1.0) > 1e-12 or abs(b_full.sum() - 1.0) > 1e-12:
        raise UnbalancedMarginalsError(
            f"marginals must both sum to 1 (got {a_full.sum()!r} and {b_full.sum()!r})"
        )

    rows = np.flatnonzero(a_full > 0)
    cols = np.flatnonzero(b_full > 0)
    a = a_full[rows]
    b = b_full[cols]
    # rebalance the last ulp so the LP is exactly feasible
    b = b * (a.sum() / b.sum())
    sub = np.ascontiguousarray(cost[np.ix_(rows, cols)])
    scale = max(1.0, float(np.abs(sub).max()))
    if max_iter is None:
        max_iter = 50 * len(a) * len(b) + 100
    bi, bj, flow, u, v, iterations, status = network_simplex(sub, a, b, 1e-11 * scale, max_iter)
    if status != STATUS_OPTIMAL:
        red = sub - u[:, None] - v[None, :]
        raise SolverIterationError(iterations, float(red.min()), sub.shape)

    keep = flow > 0
    plan = TransportPlan(rows[bi[keep]], cols[bj[keep]], flow[keep], cost.shape)

    phi_sub = _central_dual(sub, bi[keep], bj[keep], u, v)
    psi_full = inf_transform(phi_sub, cost[rows, :], "M->N")
    phi_full = inf_transform(psi_full, cost, "N->M")
    phi_full[rows] = phi_sub
    potentials = tighten_potentials(PotentialPair(phi_full, psi_full, int(rows[0])), cost)

    primal = plan.cost(cost)
    dual = potentials.dual_value(a_full, b_full)
    support = support_pairs(plan)
    return plan, potentials, SolveReport(primal, dual, primal - dual, int(iterations), support)


def _central_dual(sub, si, sj, u, v):
    """Midpoint of the optimal-dual face, projected on ``phi``, with ``phi[0] = 0``.

    With ``psi`` eliminated, optimal ``phi`` are exactly the solutions of the
    difference constraints ``phi_i - phi_k <= w(k, i)`` where
    ``w(k, i) = min_{j : (k, j) in support} (c_ij - c_kj)``.  Anchored at
    node 0, the largest solution is the shortest-path distance from 0 and
    the smallest is minus the distance to 0; both are feasible, so is their
    average.  Distances are computed with Dijkstra on the weights reduced by
    the simplex duals ``u``, which makes them nonnegative.
    """
    m = sub.shape[0]
    w = np.full((m, m), np.inf)
    for k, j in zip(si, sj):
        np.minimum(w[k], sub[:, j] - sub[k, j], out=w[k])
    reduced = np.maximum(w + u[:, None] - u[None, :], 0.0)
    upper = _dijkstra_dense(reduced, 0) + u - u[0]
    lower = -(_dijkstra_dense(reduced.T, 0) - u + u[0])
    phi = 0.5 * (upper + lower)
    phi -= phi[0]
    return phi


def _dijkstra_dense(weights, source):
    m = weights.shape[0]
    dist = np.full(m, np.inf)
    dist[source] = 0.0
    done = np.zeros(m, dtype=bool)
    for _ in range(m):
        cand = np.where(done, np.inf, dist)
        k = int(np.argmin(cand))
        if not np.isfinite(cand[k]):
            break
        done[k] = True
        np.minimum(dist, dist[k] + weights[k], out=dist)
    return dist


def tighten_potentials(pp, cost):
    """Anchor ``phi`` at ``pp.anchor`` and replace the pair by double c-transforms.

    Returns ``(phi', psi')`` with ``psi' = phi*`` and ``phi' = psi'*``.  Both
    transforms only increase a feasible pair pointwise, so the dual
    objective cannot decrease.
    """
    shift = float(pp.phi[pp.anchor])
    phi = np.asarray(pp.phi, dtype=float) - shift
    psi_new = inf_transform(phi, cost, "M->N")
    phi_new = inf_transform(psi_new, cost, "N->M")
    return PotentialPair(phi_new, psi_new, pp.anchor)


def duality_gap(plan, pp, cost, mu, nu):
    """Primal cost of ``plan`` minus the dual objective of ``pp``."""
    if isinstance(plan, TransportPlan):
        primal = plan.cost(cost)
    else:
        primal = float(np.sum(np.asarray(plan) * cost))
    return primal - pp.dual_value(_masses(mu), _masses(nu))


def support_pairs(plan, tol=SUPPORT_TOL):
    """Sorted ``(i, j)`` pairs carrying at least ``tol`` mass."""
    keep = plan.mass >= tol
    return sorted(zip(plan.rows[keep].tolist(), plan.cols[keep].tolist()))


class MonotonicityCheck(NamedTuple):
    passed: bool
    worst: float
    worst_pairs: tuple


def cyclical_monotonicity_check(pairs, surf_m, surf_n, tol=1e-8):
    """Two-point monotonicity ``(x - x') . (y - y') >= -tol`` over support pairs."""
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    if len(pairs) < 2:
        return MonotonicityCheck(True, 0.0, ())
    x = np.asarray(getattr(surf_m, "points", surf_m))[pairs[:, 0]]
    y = np.asarray(getattr(surf_n, "points", surf_n))[pairs[:, 1]]
    prod = (x @ y.T)
    d = np.diag(prod)
    # (x_a - x_b).(y_a - y_b) = x_a.y_a + x_b.y_b - x_a.y_b - x_b.y_a
    table = d[:, None] + d[None, :] - prod - prod.T
    a, b = np.unravel_index(int(np.argmin(table)), table.shape)
    worst = float(table[a, b])
    return MonotonicityCheck(worst >= -tol, worst, (tuple(pairs[a]), tuple(pairs[b])))
