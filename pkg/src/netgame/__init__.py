"""Simulator for distributed learning games with strategic network design.

Players jointly choose learning parameters and outgoing link weights; the
package provides the commutative (best response + network formation + ADMM)
and concurrent (online mirror descent) equilibrium solvers, a streaming
recursive update, and the welfare comparison against consensus-constrained
distributed learning, plus a CLI experiment harness (``netgame``).
"""

from ._accel import BACKEND
from .core import (
    GameConfig,
    LearningProfile,
    NetgameError,
    NetworkWeights,
    StrategyProfile,
    disagreement,
    row_feasible,
    validate_config,
)
from .losses import LogisticLoss, QuadraticLoss, quadratic_from_arrays, quadratic_from_data

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "GameConfig",
    "LearningProfile",
    "LogisticLoss",
    "NetgameError",
    "NetworkWeights",
    "QuadraticLoss",
    "StrategyProfile",
    "disagreement",
    "quadratic_from_arrays",
    "quadratic_from_data",
    "row_feasible",
    "validate_config",
    "__version__",
]
