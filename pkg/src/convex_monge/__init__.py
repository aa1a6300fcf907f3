"""Discrete optimal transport between measures on convex curves, with
diagnostics relating the regularity of the sup-transform of a Kantorovich
potential to graph-supported optimal plans."""

__version__ = "0.1.0"

from .config import PRESETS, ConfigError, ExperimentConfig, parse_config, preset
from .estimators import KantorovichTransport
from .experiment import Report, emit_report, run_experiment
from .geometry import ConvexCurveSpec, SampledSurface, sample_uniform_arclength
from .measures import DensitySpec, DiscreteMeasure, discretize_measure
from .transport import PotentialPair, TransportPlan, cost_matrix, solve_kantorovich

__all__ = [
    "PRESETS",
    "ConfigError",
    "ConvexCurveSpec",
    "DensitySpec",
    "DiscreteMeasure",
    "ExperimentConfig",
    "KantorovichTransport",
    "PotentialPair",
    "Report",
    "SampledSurface",
    "TransportPlan",
    "cost_matrix",
    "discretize_measure",
    "emit_report",
    "parse_config",
    "preset",
    "run_experiment",
    "sample_uniform_arclength",
    "solve_kantorovich",
]
