"""Distributed binary detection via an evolutionary game on regular networks.

Layers, bottom up: closed-form game primitives (``model``), continuum
dynamics and stability (``meanfield``), random regular interaction graphs
(``network``), the exact stochastic simulator (``simulator``), sweep
experiments tying them together (``experiments``), and an HTTP service
plus CLI on top (``service``, ``cli``).
"""

from .experiments import SweepRow, SweepSpec, emit_report, run_sweep
from .meanfield import EssReport, Trajectory, classify_ess, integrate
from .model import (
    DetectorResult,
    GameParams,
    TypeProfile,
    centralized_decision,
    discriminant,
)
from .network import RegularGraph, generate_regular, validate
from .simulator import EnsembleResult, TrialResult, run_ensemble, run_trial

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "TypeProfile",
    "GameParams",
    "DetectorResult",
    "discriminant",
    "centralized_decision",
    "EssReport",
    "Trajectory",
    "classify_ess",
    "integrate",
    "RegularGraph",
    "generate_regular",
    "validate",
    "TrialResult",
    "EnsembleResult",
    "run_trial",
    "run_ensemble",
    "SweepSpec",
    "SweepRow",
    "run_sweep",
    "emit_report",
]
