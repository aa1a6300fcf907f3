from .solver import (
    MonotonicityCheck,
    PotentialPair,
    SolveReport,
    SolverIterationError,
    TransportError,
    TransportPlan,
    UnbalancedMarginalsError,
    cost_matrix,
    cyclical_monotonicity_check,
    duality_gap,
    solve_kantorovich,
    support_pairs,
    tighten_potentials,
)

__all__ = [
    "MonotonicityCheck",
    "PotentialPair",
    "SolveReport",
    "SolverIterationError",
    "TransportError",
    "TransportPlan",
    "UnbalancedMarginalsError",
    "cost_matrix",
    "cyclical_monotonicity_check",
    "duality_gap",
    "solve_kantorovich",
    "support_pairs",
    "tighten_potentials",
]
