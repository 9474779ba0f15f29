"""Pairwise quantum steering in small networks of noisy partially entangled pairs."""

from __future__ import annotations

__version__ = "0.1.0"

from .criteria import (  # noqa: E402
    CriterionReport,
    MeasurementScheme,
    alpha_threshold,
    n_threshold,
    steerable,
)
from .errors import NumericalError, SteerkitError, ValidationError  # noqa: E402
from .lhs import Assemblage, Status, SteeringVerdict, assemblage_from, decide, lhs_feasible  # noqa: E402
from .network import NetworkCase, classify, pairwise_matrix  # noqa: E402
from .polytope import bloch_polytope  # noqa: E402
from .projective import classify_all_projective  # noqa: E402
from .qstate import PauliForm, TwoQubitState, XStateParams, canonicalize_x, psi_alpha  # noqa: E402
from .scenarios import Kind, PairRole, Scenario, entanglement_threshold, reduced_pair_state  # noqa: E402

__all__ = [
    "Assemblage",
    "CriterionReport",
    "Kind",
    "MeasurementScheme",
    "NetworkCase",
    "NumericalError",
    "PairRole",
    "PauliForm",
    "Scenario",
    "Status",
    "SteeringVerdict",
    "SteerkitError",
    "TwoQubitState",
    "ValidationError",
    "XStateParams",
    "alpha_threshold",
    "assemblage_from",
    "bloch_polytope",
    "canonicalize_x",
    "classify",
    "classify_all_projective",
    "decide",
    "entanglement_threshold",
    "lhs_feasible",
    "n_threshold",
    "pairwise_matrix",
    "psi_alpha",
    "reduced_pair_state",
    "steerable",
]
