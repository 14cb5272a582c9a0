"""Poly-PL chemical reaction network analysis."""

from ._kernels import BACKEND
from .errors import (
    InputError,
    InvariantViolation,
    PolyPLError,
    PreconditionUnmet,
)
from .kinetics import PolyPLKinetics, Term, canonicalize, classify, evaluate
from .network import Network, structural_report, validate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "InputError",
    "InvariantViolation",
    "Network",
    "PolyPLError",
    "PolyPLKinetics",
    "PreconditionUnmet",
    "Term",
    "canonicalize",
    "classify",
    "evaluate",
    "structural_report",
    "validate",
]
