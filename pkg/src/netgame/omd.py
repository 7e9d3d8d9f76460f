"""Concurrent equilibrium seeking by multi-agent online mirror descent.

Every round, each player forms her payoff gradient from her own state and
the (possibly noise-corrupted) learning actions received from the others,
then takes a mirror step through the prox-mapping

    P_s(v) = argmin_{s' feasible} { <v, s - s'> + D(s', s) },

where D is the Bregman divergence of the chosen distance-generating
function. With the Euclidean geometry this is exactly a projected gradient
step; the p-norm geometry (1 < p <= 2) is solved numerically. Updates are
simultaneous across players with step sizes gamma_n = gamma0 * n^(-q),
0.5 < q <= 1, so that sum gamma_n diverges while sum gamma_n^2 converges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .core import (
    BudgetInfeasible,
    DimensionMismatch,
    GameConfig,
    NetgameError,
    NoConvergence,
    StrategyProfile,
)
from .game import flatten_profile, payoff_gradient_arrays, potential_arrays
from .trace import RunTrace, TraceRecord


@dataclass(frozen=True)
class BregmanGeometry:
    """Distance-generating function: Euclidean or squared p-norm, 1 < p <= 2."""

    kind: str = "euclidean"
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "pnorm"):
            raise NetgameError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "pnorm" and not 1.0 < self.p <= 2.0:
            raise NetgameError("pnorm geometry requires 1 < p <= 2")

    @property
    def modulus(self) -> float:
        """Strong-convexity constant: 1 for Euclidean, p - 1 for p-norm."""
        return 1.0 if self.kind == "euclidean" else self.p - 1.0

    def h(self, s: np.ndarray) -> float:
        s = np.asarray(s, dtype=float)
        if self.kind == "euclidean":
            return 0.5 * float(s @ s)
        return 0.5 * float(np.sum(np.abs(s) ** self.p) ** (2.0 / self.p))

    def grad_h(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.kind == "euclidean":
            return s.copy()
        norm = np.sum(np.abs(s) ** self.p) ** (1.0 / self.p)
        if norm == 0.0:
            return np.zeros_like(s)
        return norm ** (2.0 - self.p) * np.sign(s) * np.abs(s) ** (self.p - 1.0)


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes gamma_n = gamma0 * n^(-exponent), n >= 1."""

    gamma0: float = 0.5
    exponent: float = 0.6

    def __post_init__(self):
        if self.gamma0 <= 0:
            raise NetgameError("gamma0 must be positive")
        if not 0.5 < self.exponent <= 1.0:
            raise NetgameError("exponent must lie in (0.5, 1]")

    def gamma(self, n: int) -> float:
        return self.gamma0 * float(n) ** (-self.exponent)


@dataclass(frozen=True)
class NoiseModel:
    """Observation noise on neighbour learning actions: none or iid Gaussian."""

    kind: str = "none"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian"):
            raise NetgameError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise NetgameError("sigma must be nonnegative")


def bregman_divergence(geom: BregmanGeometry, s: np.ndarray, x: np.ndarray) -> float:
    """D(s, x) = h(s) - h(x) - <grad h(x), s - x>; at least (K/2)||s - x||^2."""
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if s.shape != x.shape:
        raise DimensionMismatch(f"shapes {s.shape} and {x.shape} differ")
    return float(geom.h(s) - geom.h(x) - geom.grad_h(x) @ (s - x))


def project_budget_box(v: np.ndarray, beta: float, tol: float = 1e-9) -> np.ndarray:
    """Euclidean projection onto {m in [0,1]^n : sum(m) = beta}.

    Bisection on the shift multiplier tau in m_j = clip(v_j - tau, 0, 1);
    the budget is met within ``tol`` (in practice to rounding).
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if tol <= 0:
        raise NetgameError("tol must be positive")
    if not 0.0 < beta <= v.shape[0]:
        raise BudgetInfeasible(f"beta = {beta} outside (0, {v.shape[0]}]")
    return _accel.project_budget_box(v, float(beta), tol)


def _split(s_i: np.ndarray, d: int):
    return s_i[:d], s_i[d:]


def _project_block(s_i: np.ndarray, config: GameConfig, i: int) -> np.ndarray:
    d = config.dim
    u_part, m_part = _split(np.asarray(s_i, dtype=float), d)
    lo, hi = config.action_box
    out = np.empty_like(s_i, dtype=float)
    out[:d] = np.clip(u_part, lo, hi)
    out[d:] = project_budget_box(m_part, config.budget[i])
    return out


def prox_map(
    s_i: np.ndarray,
    v_i: np.ndarray,
    geom: BregmanGeometry,
    config: GameConfig,
    i: int,
    tol: float = 1e-9,
    max_iters: int = 10_000,
) -> np.ndarray:
    """Prox-mapping of one player's strategy block [u_i, m^i off-diagonal].

    Euclidean geometry: box-clamp the u-part of s_i + v_i and budget-box
    project the m-part. The p-norm geometry minimizes
    D(s', s_i) - <v_i, s'> over the same feasible set by projected gradient
    with backtracking, started from the Euclidean solution.
    """
    s_i = np.asarray(s_i, dtype=float).reshape(-1)
    v_i = np.asarray(v_i, dtype=float).reshape(-1)
    if s_i.shape != v_i.shape:
        raise DimensionMismatch("strategy and gradient blocks differ in shape")
    if geom.kind == "euclidean":
        return _project_block(s_i + v_i, config, i)

    target = geom.grad_h(s_i) + v_i
    x = _project_block(s_i + v_i, config, i)
    fx = geom.h(x) - float(target @ x)
    step = 1.0
    for _ in range(max_iters):
        g = geom.grad_h(x) - target
        while True:
            x_new = _project_block(x - step * g, config, i)
            f_new = geom.h(x_new) - float(target @ x_new)
            if f_new <= fx + float(g @ (x_new - x)) + 0.5 / step * float((x_new - x) @ (x_new - x)) + 1e-15:
                break
            step *= 0.5
            if step < 1e-14:
                break
        delta = float(np.max(np.abs(x_new - x)))
        x, fx = x_new, f_new
        step = min(step * 2.0, 1e6)
        if delta < tol:
            return x
    raise NoConvergence("p-norm prox did not reach tolerance")


def noisy_feedback(u_neighbors: np.ndarray, noise: NoiseModel, rng: np.random.Generator):
    """Corrupt observed neighbour actions; Gaussian noise is iid per coordinate."""
    u_neighbors = np.asarray(u_neighbors, dtype=float)
    if noise.kind == "none" or noise.sigma == 0.0:
        return u_neighbors.copy()
    return u_neighbors + rng.normal(0.0, noise.sigma, size=u_neighbors.shape)


def _round_rng(seed: int, n: int) -> np.random.Generator:
    # counter-based stream: one Philox block per round, independent of history
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, n]))


def omd_run(
    s0: StrategyProfile,
    config: GameConfig,
    geom: BregmanGeometry | None = None,
    schedule: StepSchedule | None = None,
    noise: NoiseModel | None = None,
    max_rounds: int = 10_000,
    reference: StrategyProfile | None = None,
    record_every: int = 1,
    record_phi: bool = True,
    tail_average_fraction: float = 0.0,
):
    """Run simultaneous multi-agent mirror descent from ``s0``.

    Each round n, player i forms her gradient from her own block and the
    observed (noisy) neighbour actions, then applies
    s_i <- P_{s_i}(-gamma_n v_i). Returns ``(StrategyProfile, RunTrace)``;
    the trace records step norms, the potential value (when ``record_phi``)
    and the distance to ``reference`` when one is supplied. When
    ``tail_average_fraction`` > 0, the average of the iterates over the
    final fraction of rounds is stored in ``trace.tail_average`` as a
    flattened profile vector.

    Convergence is reported through the trace, never guaranteed: the run
    always executes ``max_rounds`` rounds.
    """
    geom = geom or BregmanGeometry()
    schedule = schedule or config.schedule or StepSchedule()
    noise = noise or config.noise or NoiseModel()

    n, d = config.n_players, config.dim
    lo, hi = config.action_box
    u = s0.u.copy()
    m = s0.m.copy()
    offdiag = [np.delete(np.arange(n), i) for i in range(n)]
    trace = RunTrace()
    ref_flat = None if reference is None else flatten_profile(reference.u, reference.m)

    tail_start = max_rounds + 1
    tail_sum = None
    tail_count = 0
    if tail_average_fraction > 0.0:
        tail_start = max_rounds - int(np.ceil(tail_average_fraction * max_rounds)) + 1
        tail_sum = np.zeros(n * (d + n - 1))

    gaussian = noise.kind == "gaussian" and noise.sigma > 0.0
    euclidean = geom.kind == "euclidean"

    for rnd in range(1, max_rounds + 1):
        gamma = schedule.gamma(rnd)
        if gaussian:
            eps = _round_rng(config.seed, rnd).normal(0.0, noise.sigma, size=(n, n, d))
            u_hat = u[None, :, :] + eps  # u_hat[i, j] = u_j as observed by i
        else:
            u_hat = None

        new_u = np.empty_like(u)
        new_m = m.copy()
        max_step = 0.0
        for i in range(n):
            obs = u if u_hat is None else u_hat[i]
            diffs = u[i][None, :] - obs
            grad_u = config.alpha[i] * config.losses[i].gradient(u[i]) + 2.0 * (m[i] @ diffs)
            grad_m = np.einsum("jk,jk->j", diffs, diffs)[offdiag[i]]
            if euclidean:
                ui = np.clip(u[i] - gamma * grad_u, lo, hi)
                mi = project_budget_box(m[i, offdiag[i]] - gamma * grad_m, config.budget[i])
            else:
                s_i = np.concatenate([u[i], m[i, offdiag[i]]])
                v_i = -gamma * np.concatenate([grad_u, grad_m])
                out = prox_map(s_i, v_i, geom, config, i)
                ui, mi = out[:d], out[d:]
            max_step = max(
                max_step,
                float(np.max(np.abs(ui - u[i]))),
                float(np.max(np.abs(mi - m[i, offdiag[i]]))),
            )
            new_u[i] = ui
            new_m[i, offdiag[i]] = mi
        u, m = new_u, new_m

        if rnd >= tail_start:
            tail_sum += flatten_profile(u, m)
            tail_count += 1

        if rnd % record_every == 0 or rnd == max_rounds:
            dist = None
            if ref_flat is not None:
                dist = float(np.linalg.norm(flatten_profile(u, m) - ref_flat))
            phi = potential_arrays(u, m, config) if record_phi else None
            trace.append(
                TraceRecord(
                    iteration=rnd,
                    layer="omd",
                    phi=phi,
                    max_step=max_step,
                    dist_ref=dist,
                )
            )

    if tail_sum is not None and tail_count:
        trace.tail_average = tail_sum / tail_count

    # the iterates remain feasible by construction of the prox step
    profile = StrategyProfile.from_arrays(u, m, config)
    return profile, trace
