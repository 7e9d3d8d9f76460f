"""Domain types, feasibility predicates and elementary quantities of the game.

A game instance has N players. Player i holds a learning action u_i inside a
coordinate box and an outgoing link-weight row m^i with entries in [0, 1]
whose off-diagonal sum must equal the player's budget beta_i. Everything else
in the package (costs, solvers, streaming updates) is built on the value
objects defined here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

DEFAULT_FEAS_TOL = 1e-9


class NetgameError(Exception):
    """Base class for all errors raised by this package."""


class TooFewPlayers(NetgameError):
    pass


class BudgetInfeasible(NetgameError):
    pass


class DegenerateBox(NetgameError):
    pass


class DimensionMismatch(NetgameError):
    pass


class NotSymmetric(NetgameError):
    pass


class SingularSystem(NetgameError):
    pass


class NoConvergence(NetgameError):
    pass


class TheoremViolation(NetgameError):
    """A provable inequality failed; signals an implementation bug."""


class InfeasibleInput(NetgameError):
    pass


class NonSmoothLoss(NetgameError):
    pass


class EmptyData(NetgameError):
    pass


class NumericalBreakdown(NetgameError):
    pass


def _per_player(value, n: int, name: str) -> np.ndarray:
    """Broadcast a scalar to a length-n float array, or validate the length."""
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(n, float(arr[0]))
    if arr.shape != (n,):
        raise DimensionMismatch(f"{name} must be a scalar or length-{n}, got shape {arr.shape}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GameConfig:
    """Static description of a game instance plus solver defaults.

    Parameters
    ----------
    n_players : int
        Number of nodes N (>= 2 for a valid game).
    dim : int
        Dimension d of the learning actions.
    alpha : float or array
        Per-player weight on the local learning cost (>= 0).
    budget : float or array
        Per-player link budget beta_i, with 0 < beta_i <= N - 1.
    action_box : (float, float)
        Common coordinate bounds (lo, hi) of the learning action box.
    symmetric : bool
        Undirected-network mode: link weights must satisfy m[i, j] == m[j, i].
    losses : tuple
        Per-player loss objects (see :mod:`netgame.losses`); may be empty
        until data is attached.
    seed : int
        Seed for every random draw tied to this instance.
    feas_tol : float
        Tolerance used by the feasibility predicates.

    The remaining fields hold optional solver settings; ``None`` means the
    corresponding solver uses its own defaults.
    """

    n_players: int
    dim: int
    alpha: Any = 1.0
    budget: Any = 1.0
    action_box: tuple[float, float] = (-10.0, 10.0)
    symmetric: bool = True
    losses: tuple = ()
    seed: int = 0
    feas_tol: float = DEFAULT_FEAS_TOL
    brd: Optional[Any] = None
    admm: Optional[Any] = None
    schedule: Optional[Any] = None
    noise: Optional[Any] = None
    outer_tol: float = 1e-6
    outer_max_iters: int = 100

    def __post_init__(self):
        object.__setattr__(self, "alpha", _freeze(_per_player(self.alpha, self.n_players, "alpha")))
        object.__setattr__(self, "budget", _freeze(_per_player(self.budget, self.n_players, "budget")))
        lo, hi = self.action_box
        object.__setattr__(self, "action_box", (float(lo), float(hi)))
        object.__setattr__(self, "losses", tuple(self.losses))

    @property
    def box_lo(self) -> float:
        return self.action_box[0]

    @property
    def box_hi(self) -> float:
        return self.action_box[1]

    def loss(self, i: int):
        if not self.losses:
            raise NetgameError("config carries no losses")
        return self.losses[i]


def validate_config(config: GameConfig) -> None:
    """Check every structural invariant of a :class:`GameConfig`.

    Raises ``TooFewPlayers``, ``BudgetInfeasible`` or ``DegenerateBox`` on the
    first violated invariant; returns None when all hold.
    """
    n = config.n_players
    if n < 2:
        raise TooFewPlayers(f"need at least 2 players, got {n}")
    if config.dim < 1:
        raise DimensionMismatch(f"dim must be >= 1, got {config.dim}")
    lo, hi = config.action_box
    if not lo < hi:
        raise DegenerateBox(f"action box must satisfy lo < hi, got ({lo}, {hi})")
    if np.any(config.alpha < 0):
        raise NetgameError("alpha entries must be nonnegative")
    bad = (config.budget <= 0) | (config.budget > n - 1)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise BudgetInfeasible(
            f"budget[{i}] = {config.budget[i]} outside (0, {n - 1}]; the link-weight set is empty"
        )
    if config.losses and len(config.losses) != n:
        raise DimensionMismatch(f"expected {n} losses, got {len(config.losses)}")


def disagreement(u_i: np.ndarray, u_j: np.ndarray) -> float:
    """Squared Euclidean distance between two learning actions."""
    a = np.asarray(u_i, dtype=float)
    b = np.asarray(u_j, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    diff = a - b
    return float(diff @ diff)


def row_feasible(m_row: np.ndarray, beta: float, tol: float = DEFAULT_FEAS_TOL) -> bool:
    """True iff a link-weight row lies in [0,1]^(N-1) and sums to the budget.

    ``m_row`` excludes the diagonal entry. Both the box and the budget are
    checked to within ``tol``.
    """
    if tol <= 0:
        raise NetgameError("tol must be positive")
    row = np.asarray(m_row, dtype=float)
    if np.any(row < -tol) or np.any(row > 1.0 + tol):
        return False
    return abs(float(row.sum()) - float(beta)) <= tol


def offdiag_row(m: np.ndarray, i: int) -> np.ndarray:
    """Row i of a dense link matrix with the diagonal entry removed."""
    return np.delete(np.asarray(m, dtype=float)[i], i)


@dataclass(frozen=True, eq=False)
class LearningProfile:
    """The stacked learning actions, one row per player, validated in-box."""

    u: np.ndarray
    config: GameConfig

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        cfg = self.config
        if u.shape != (cfg.n_players, cfg.dim):
            raise DimensionMismatch(
                f"expected shape {(cfg.n_players, cfg.dim)}, got {u.shape}"
            )
        lo, hi = cfg.action_box
        if np.any(u < lo - cfg.feas_tol) or np.any(u > hi + cfg.feas_tol):
            raise InfeasibleInput("learning action outside the box")
        object.__setattr__(self, "u", _freeze(u))


@dataclass(frozen=True, eq=False)
class NetworkWeights:
    """Dense N x N link-weight matrix with a zero diagonal.

    The constructor enforces the box, the per-row budgets and, in symmetric
    mode, m[i, j] == m[j, i], all to within the config tolerance. Any accepted
    matrix therefore passes :func:`row_feasible` on every row.
    """

    m: np.ndarray
    config: GameConfig

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        cfg = self.config
        n = cfg.n_players
        if m.shape != (n, n):
            raise DimensionMismatch(f"expected shape {(n, n)}, got {m.shape}")
        if np.any(np.abs(np.diag(m)) > cfg.feas_tol):
            raise InfeasibleInput("diagonal entries must be zero")
        for i in range(n):
            if not row_feasible(np.delete(m[i], i), cfg.budget[i], cfg.feas_tol):
                raise InfeasibleInput(f"row {i} violates box or budget constraints")
        if cfg.symmetric and np.max(np.abs(m - m.T)) > cfg.feas_tol:
            raise NotSymmetric("symmetric mode requires m[i, j] == m[j, i]")
        m = m.copy()
        np.fill_diagonal(m, 0.0)
        object.__setattr__(self, "m", _freeze(m))


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """A feasible pair (learning actions, link weights)."""

    learning: LearningProfile
    network: NetworkWeights

    @classmethod
    def from_arrays(cls, u: np.ndarray, m: np.ndarray, config: GameConfig) -> "StrategyProfile":
        return cls(LearningProfile(u, config), NetworkWeights(m, config))

    @property
    def u(self) -> np.ndarray:
        return self.learning.u

    @property
    def m(self) -> np.ndarray:
        return self.network.m
