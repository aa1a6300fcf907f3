"""Build and solve one discretized transport instance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SampledSurface, sample_uniform_arclength
from .measures import DiscreteMeasure, discretize_measure
from .transport import PotentialPair, SolveReport, TransportPlan, cost_matrix, solve_kantorovich


@dataclass(frozen=True, eq=False)
class SolvedInstance:
    surf_m: SampledSurface
    surf_n: SampledSurface
    mu: DiscreteMeasure
    nu: DiscreteMeasure
    cost: np.ndarray
    plan: TransportPlan
    potentials: PotentialPair
    report: SolveReport


def solve_instance(curve_m, curve_n, density_m, density_n, resolution):
    surf_m = sample_uniform_arclength(curve_m, resolution)
    surf_n = sample_uniform_arclength(curve_n, resolution)
    mu = discretize_measure(density_m, surf_m)
    nu = discretize_measure(density_n, surf_n)
    cost = cost_matrix(surf_m, surf_n)
    plan, potentials, report = solve_kantorovich(mu, nu, cost)
    return SolvedInstance(surf_m, surf_n, mu, nu, cost, plan, potentials, report)
