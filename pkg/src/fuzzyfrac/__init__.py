"""fuzzyfrac: simulation and stability certification for fuzzy fractional dynamics.

The package integrates interval (alpha-cut) dynamics driven by Caputo-type
fractional derivatives, evaluates the Mittag-Leffler decay profiles those
dynamics follow, computes explicit stability envelopes (linear-matrix,
input-to-state, delay, interconnection, stochastic moment), and verifies
simulated trajectories against the envelopes.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    ConfigError,
    ConverseNotApplicable,
    DomainError,
    EvalError,
    FuzzyFracError,
    GainTooLarge,
    GHDifferenceError,
    GridMismatchError,
    NonFiniteError,
    NotHurwitz,
    OrderingViolation,
    ParseError,
    ScenarioError,
    UnsupportedMatrixError,
)
from .mlf import ml_conv_integral, ml_one, ml_two

__all__ = [
    "__version__",
    "ml_one",
    "ml_two",
    "ml_conv_integral",
    "AccuracyError",
    "ConfigError",
    "ConverseNotApplicable",
    "DomainError",
    "EvalError",
    "FuzzyFracError",
    "GainTooLarge",
    "GHDifferenceError",
    "GridMismatchError",
    "NonFiniteError",
    "NotHurwitz",
    "OrderingViolation",
    "ParseError",
    "ScenarioError",
    "UnsupportedMatrixError",
]
