"""Player costs, the potential function, welfare and structural probes.

Player i's cost is

    J_i(u, m) = alpha_i * l_i(u_i) + sum_{j != i} m[i, j] * ||u_i - u_j||^2.

Under an undirected network the game admits the potential

    Phi(u, m) = sum_i alpha_i * l_i(u_i)
                + 1/2 * sum_i sum_{j != i} m[i, j] * ||u_i - u_j||^2,

with per-player gradient weights W_i = diag[1_d, 2 * 1_{N-1}], i.e. the
u-block of grad J_i equals the u-block of grad Phi and the m-block equals
twice the m-block of Phi. All equilibrium computations use the loss form
without the constant offset (``exact=False``); constants do not move
minimizers.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from .core import (
    GameConfig,
    NotSymmetric,
    NonSmoothLoss,
    StrategyProfile,
)


def _loss_values(u: np.ndarray, config: GameConfig, exact: bool = False) -> np.ndarray:
    return np.array(
        [config.losses[i].value(u[i], exact=exact) for i in range(config.n_players)]
    )


def player_cost_arrays(u: np.ndarray, m: np.ndarray, i: int, config: GameConfig) -> float:
    if not 0 <= i < config.n_players:
        raise IndexError(f"player index {i} out of range")
    d2 = _accel.pairwise_sqdist(u)
    local = config.alpha[i] * config.losses[i].value(u[i], exact=False)
    return float(local + m[i] @ d2[i])


def player_cost(s: StrategyProfile, i: int, config: GameConfig) -> float:
    """Cost of player i at the profile: local loss plus weighted disagreements."""
    return player_cost_arrays(s.u, s.m, i, config)


def player_costs(u: np.ndarray, m: np.ndarray, config: GameConfig, exact: bool = False) -> np.ndarray:
    """All player costs in one pass (vector of J_i)."""
    d2 = _accel.pairwise_sqdist(u)
    local = config.alpha * _loss_values(u, config, exact=exact)
    return local + np.einsum("ij,ij->i", m, d2)


def potential_arrays(u: np.ndarray, m: np.ndarray, config: GameConfig, exact: bool = False) -> float:
    d2 = _accel.pairwise_sqdist(u)
    local = float(config.alpha @ _loss_values(u, config, exact=exact))
    return local + 0.5 * float(np.sum(m * d2))

def potential(s: StrategyProfile, config: GameConfig, exact: bool = False) -> float:
    """Potential value Phi(u, m); equals the undirected form when m is symmetric."""
    return potential_arrays(s.u, s.m, config, exact=exact)


def social_welfare(u, config: GameConfig, exact: bool = False) -> float:
    """Negative sum of the (alpha-weighted) local losses."""
    arr = u.u if hasattr(u, "u") else np.asarray(u, dtype=float)
    return -float(config.alpha @ _loss_values(arr, config, exact=exact))


def payoff_gradient_arrays(u: np.ndarray, m: np.ndarray, config: GameConfig):
    """Per-player gradients of their own cost.

    Returns ``(grad_u, grad_m)`` where ``grad_u[i]`` is
    alpha_i * grad l_i(u_i) + 2 * sum_j m[i, j] (u_i - u_j) and ``grad_m`` is
    the N x N matrix of squared distances ||u_i - u_j||^2 with zero diagonal
    (entry (i, j) is the derivative of J_i in m[i, j]).
    """
    n = config.n_players
    grad_u = np.empty_like(u)
    for i in range(n):
        pull = m[i] @ (u[i][None, :] - u)
        grad_u[i] = config.alpha[i] * config.losses[i].gradient(u[i]) + 2.0 * pull
    grad_m = _accel.pairwise_sqdist(u)
    return grad_u, grad_m


def payoff_gradient(s: StrategyProfile, config: GameConfig):
    return payoff_gradient_arrays(s.u, s.m, config)


def flatten_player_blocks(grad_u: np.ndarray, grad_m: np.ndarray) -> np.ndarray:
    """Stack [u-block, off-diagonal m-block] per player into one vector."""
    n = grad_u.shape[0]
    parts = []
    for i in range(n):
        parts.append(grad_u[i])
        parts.append(np.delete(grad_m[i], i))
    return np.concatenate(parts)


def flatten_profile(u: np.ndarray, m: np.ndarray) -> np.ndarray:
    return flatten_player_blocks(u, m)


def potential_gradient_blocks(u: np.ndarray, m: np.ndarray, config: GameConfig):
    """Analytic gradient of Phi, split like the payoff gradient.

    u-block: alpha_i grad l_i + sum_j (m[i,j] + m[j,i]) (u_i - u_j);
    m-block entry (i, j): ||u_i - u_j||^2 / 2.
    """
    n = config.n_players
    grad_u = np.empty_like(u)
    w = m + m.T
    for i in range(n):
        pull = w[i] @ (u[i][None, :] - u)
        grad_u[i] = config.alpha[i] * config.losses[i].gradient(u[i]) + pull
    grad_m = 0.5 * _accel.pairwise_sqdist(u)
    return grad_u, grad_m


def potential_identity_residual(s: StrategyProfile, i: int, config: GameConfig) -> float:
    """Max-norm of grad_{s_i} J_i - W_i grad_{s_i} Phi (both analytic).

    Zero (to rounding) on symmetric networks; requires symmetric mode.
    """
    u, m = s.u, s.m
    if np.max(np.abs(m - m.T)) > config.feas_tol:
        raise NotSymmetric("the potential identity requires an undirected network")
    gu_j, gm_j = payoff_gradient_arrays(u, m, config)
    gu_p, gm_p = potential_gradient_blocks(u, m, config)
    res_u = np.max(np.abs(gu_j[i] - gu_p[i]))
    res_m = np.max(np.abs(np.delete(gm_j[i], i) - 2.0 * np.delete(gm_p[i], i)))
    return float(max(res_u, res_m))


def monotonicity_probe(s_a: StrategyProfile, s_b: StrategyProfile, config: GameConfig) -> float:
    """Inner product <v(s') - v(s), s' - s> over all stacked player blocks."""
    va = flatten_player_blocks(*payoff_gradient_arrays(s_a.u, s_a.m, config))
    vb = flatten_player_blocks(*payoff_gradient_arrays(s_b.u, s_b.m, config))
    xa = flatten_profile(s_a.u, s_a.m)
    xb = flatten_profile(s_b.u, s_b.m)
    return float((vb - va) @ (xb - xa))


def game_hessian_pd_probe(s: StrategyProfile, config: GameConfig, step: float = 1e-5):
    """Minimum eigenvalue of the game Hessian at s, by central differences.

    The (i, j) block is the average of the mixed second derivatives
    d(grad_{s_i} J_i)/d s_j and its (j, i) transpose, i.e. the symmetric part
    of the stacked Jacobian of the payoff-gradient map. Returns
    ``(min_eigenvalue, is_pd)``.
    """
    for loss in config.losses:
        if not hasattr(loss, "gradient"):
            raise NonSmoothLoss("the Hessian probe needs twice-differentiable losses")
    u0 = s.u.copy()
    m0 = s.m.copy()
    n, d = u0.shape
    block = d + n - 1
    dim = n * block

    def stacked(uu, mm):
        return flatten_player_blocks(*payoff_gradient_arrays(uu, mm, config))

    offdiag_cols = [np.delete(np.arange(n), i) for i in range(n)]
    jac = np.empty((dim, dim))
    col = 0
    for j in range(n):
        for c in range(d):
            up, um = u0.copy(), u0.copy()
            up[j, c] += step
            um[j, c] -= step
            jac[:, col] = (stacked(up, m0) - stacked(um, m0)) / (2.0 * step)
            col += 1
        for k in offdiag_cols[j]:
            mp, mm = m0.copy(), m0.copy()
            mp[j, k] += step
            mm[j, k] -= step
            jac[:, col] = (stacked(u0, mp) - stacked(u0, mm)) / (2.0 * step)
            col += 1
    hess = 0.5 * (jac + jac.T)
    min_eig = float(np.linalg.eigvalsh(hess)[0])
    return min_eig, bool(min_eig > 0.0)
