"""Recursive per-node learning on streaming data.

With a quadratic local loss, fixed links and fixed neighbour actions, the
node's best response after k points solves the stationarity condition

    2 Lambda_k u_k + Gamma_k = 0,

where Lambda_k = alpha * (mean of x x^T) + (row weight sum) * I and
Gamma_k = alpha * (mean of -2 x y) - 2 * sum_j m_j u_j. Both statistics
update in O(d^2) per point, so the node never transmits raw data; only the
stored neighbour actions enter. The cached inverse of Lambda follows a
rank-one (Sherman-Morrison) fast path after the exact rescaling; the
identity shift contributed by the link budget is not rank-one, so a drift
monitor refactorizes whenever ||Lambda inv(Lambda) - I|| leaves tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import GameConfig, NumericalBreakdown, SingularSystem

# refactorize the cached inverse beyond this drift (tight enough that the
# stationarity residual stays below 1e-8)
_DRIFT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StreamState:
    """Sufficient statistics of one node after k streamed points."""

    k: int
    Lambda: np.ndarray
    Gamma: np.ndarray
    Lambda_inv: np.ndarray
    u: np.ndarray
    alpha: float
    row_weight: float          # 1^T m of the node's link row
    neighbor_term: np.ndarray  # 2 * sum_j m_j u_j


def _solve_state(Lambda, Gamma, Lambda_inv):
    """u from the stationarity condition, with iterative refinement."""
    u = -0.5 * Lambda_inv @ Gamma
    for _ in range(3):
        r = 2.0 * Lambda @ u + Gamma
        if np.max(np.abs(r)) < 1e-12:
            break
        u = u - 0.5 * Lambda_inv @ r
    return u


def _drift(Lambda, Lambda_inv):
    d = Lambda.shape[0]
    return float(np.max(np.abs(Lambda @ Lambda_inv - np.eye(d))))


def stream_init(
    first_point,
    m_row: np.ndarray,
    neighbor_u: np.ndarray,
    config: GameConfig,
    node: int = 0,
) -> StreamState:
    """State after the first observed point.

    ``m_row`` is the node's full-length link row (zero self-entry) and
    ``neighbor_u`` the full N x d action array (the node's own row is
    ignored, its link weight being zero).
    """
    x, y = first_point
    x = np.asarray(x, dtype=float).reshape(-1)
    m_row = np.asarray(m_row, dtype=float)
    neighbor_u = np.asarray(neighbor_u, dtype=float)
    alpha = float(config.alpha[node])
    b = float(m_row.sum())
    d = x.shape[0]
    Lambda = alpha * np.outer(x, x) + b * np.eye(d)
    w = 2.0 * (m_row @ neighbor_u)
    Gamma = alpha * (-2.0 * x * float(y)) - w
    try:
        Lambda_inv = np.linalg.inv(Lambda)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(
            "the first point leaves the statistics singular (zero link budget)"
        ) from exc
    u = _solve_state(Lambda, Gamma, Lambda_inv)
    return StreamState(
        k=1,
        Lambda=Lambda,
        Gamma=Gamma,
        Lambda_inv=Lambda_inv,
        u=u,
        alpha=alpha,
        row_weight=b,
        neighbor_term=w,
    )


def stream_update(state: StreamState, point) -> StreamState:
    """Fold one new local point into the state.

    Only the state and the point enter: the running averages are updated
    exactly, the cached inverse takes the rescale-plus-rank-one fast path and
    is refactorized when its drift monitor trips.
    """
    x, y = point
    x = np.asarray(x, dtype=float).reshape(-1)
    k = state.k
    k1 = k + 1
    b = state.row_weight
    alpha = state.alpha

    Lambda = (k * state.Lambda + b * np.eye(x.shape[0]) + alpha * np.outer(x, x)) / k1
    # Gamma = alpha * Ybar - w with Ybar the running average of -2 x y
    Gamma = (k * (state.Gamma + state.neighbor_term) - 2.0 * alpha * x * float(y)) / k1 - state.neighbor_term

    # fast path: exact rescale and Sherman-Morrison for the rank-one data
    # term; the identity shift is left to the drift monitor
    M = state.Lambda_inv * (k1 / k)
    rho = alpha / k1
    Mx = M @ x
    denom = 1.0 + rho * float(x @ Mx)
    M = M - (rho / denom) * np.outer(Mx, Mx)
    if _drift(Lambda, M) > _DRIFT_TOL:
        try:
            M = np.linalg.inv(Lambda)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown("refactorizing the statistics failed") from exc
        if _drift(Lambda, M) > 1e-5:
            raise NumericalBreakdown("statistics too ill-conditioned to invert")
    u = _solve_state(Lambda, Gamma, M)
    return replace(state, k=k1, Lambda=Lambda, Gamma=Gamma, Lambda_inv=M, u=u)


def with_network(state: StreamState, m_row: np.ndarray, neighbor_u: np.ndarray) -> StreamState:
    """Refresh the stored links and neighbour actions mid-stream.

    Supports the synchronization variant (neighbours re-announce their
    actions) as well as connect/disconnect events; the data statistics are
    untouched.
    """
    m_row = np.asarray(m_row, dtype=float)
    neighbor_u = np.asarray(neighbor_u, dtype=float)
    b_new = float(m_row.sum())
    w_new = 2.0 * (m_row @ neighbor_u)
    Lambda = state.Lambda + (b_new - state.row_weight) * np.eye(state.Lambda.shape[0])
    Gamma = state.Gamma + state.neighbor_term - w_new
    try:
        Lambda_inv = np.linalg.inv(Lambda)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("the refreshed links leave the statistics singular") from exc
    u = _solve_state(Lambda, Gamma, Lambda_inv)
    return replace(
        state,
        Lambda=Lambda,
        Gamma=Gamma,
        Lambda_inv=Lambda_inv,
        u=u,
        row_weight=b_new,
        neighbor_term=w_new,
    )


def state_from_batch(
    points,
    m_row: np.ndarray,
    neighbor_u: np.ndarray,
    config: GameConfig,
    node: int = 0,
) -> StreamState:
    """State equivalent to having streamed the given points in order."""
    points = list(points)
    if not points:
        raise ValueError("need at least one point")
    state = stream_init(points[0], m_row, neighbor_u, config, node=node)
    for point in points[1:]:
        state = stream_update(state, point)
    return state


def stream_run(
    points,
    m_row: np.ndarray,
    neighbor_u: np.ndarray,
    config: GameConfig,
    node: int = 0,
):
    """Fold a whole stream; returns ``(final u, per-step action trace)``.

    The trace has one row per observed point, starting with the
    single-point state.
    """
    points = list(points)
    if not points:
        raise ValueError("the stream must contain at least one point")
    state = stream_init(points[0], m_row, neighbor_u, config, node=node)
    trace = [state.u.copy()]
    for point in points[1:]:
        state = stream_update(state, point)
        trace.append(state.u.copy())
    return state.u.copy(), np.array(trace)
