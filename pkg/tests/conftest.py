import numpy as np
import pytest

from netgame.commutative import random_symmetric_network
from netgame.core import GameConfig, LearningProfile, NetworkWeights, StrategyProfile
from netgame.losses import quadratic_from_arrays


def make_quadratic_config(rng, n=3, d=2, symmetric=True, k=None, budget=None, alpha=None,
                          box=(-10.0, 10.0), target_scale=2.0, noise=0.3, seed=0):
    """Random game with per-player quadratic losses built from data.

    Alphas stay in [0.5, 2] and sample counts at least d + 2 so the potential
    is strictly convex in the learning actions.
    """
    k = k if k is not None else d + 4
    losses = []
    for _ in range(n):
        F = rng.standard_normal((k, d))
        w = rng.uniform(-target_scale, target_scale, size=d)
        y = F @ w + noise * rng.standard_normal(k)
        losses.append(quadratic_from_arrays(F, y))
    if budget is None:
        budget = float(rng.uniform(0.5, n - 1))
    if alpha is None:
        alpha = rng.uniform(0.5, 2.0, size=n)
    return GameConfig(
        n_players=n, dim=d, alpha=alpha, budget=budget, action_box=box,
        symmetric=symmetric, losses=tuple(losses), seed=seed,
    )


def random_feasible_profile(config, rng):
    lo, hi = config.action_box
    span = min(2.0, (hi - lo) / 4)
    u = rng.uniform(-span, span, size=(config.n_players, config.dim))
    if config.symmetric:
        network = random_symmetric_network(config, rng)
    else:
        n = config.n_players
        m = np.zeros((n, n))
        from netgame import _accel

        for i in range(n):
            draw = rng.uniform(0, 1, size=n - 1)
            m[i, np.delete(np.arange(n), i)] = _accel.project_budget_box(
                draw, config.budget[i], 1e-12
            )
        network = NetworkWeights(m, config)
    return StrategyProfile(LearningProfile(u, config), network)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
