"""Two-layer equilibrium seeking: best responses plus network formation.

Layer one fixes the network and lets players best-respond in their learning
actions until the profile is stationary. Layer two fixes the learning
actions and re-optimizes the link weights: a per-row greedy fill for
directed networks (the row problem is a linear program over a capped
simplex, so the greedy solution is exact), or a decentralized ADMM
consensus scheme when the network must stay undirected. Alternating the two
layers is the outer algorithm; under an undirected network every layer
decreases the potential, so the alternation terminates at a profile where
neither layer can improve.

The module also carries the joint potential minimization, the
consensus-constrained baseline and the welfare comparison between the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import _accel
from .core import (
    BudgetInfeasible,
    GameConfig,
    LearningProfile,
    NetgameError,
    NetworkWeights,
    NoConvergence,
    NotSymmetric,
    InfeasibleInput,
    SingularSystem,
    StrategyProfile,
    TheoremViolation,
    validate_config,
)
from .game import player_costs, potential_arrays, social_welfare
from .losses import QuadraticLoss
from .omd import project_budget_box
from .trace import RunTrace, TraceRecord


@dataclass(frozen=True)
class BrdSettings:
    """Best-response dynamics controls.

    ``sequential`` order updates players one at a time against the freshest
    profile (each update then exactly decreases the potential on undirected
    networks); ``simultaneous`` updates all players against the previous
    round.
    """

    order: str = "sequential"
    tol: float = 1e-8
    max_iters: int = 1000

    def __post_init__(self):
        if self.order not in ("sequential", "simultaneous"):
            raise NetgameError(f"unknown order {self.order!r}")
        if self.tol <= 0 or self.max_iters < 1:
            raise NetgameError("tol must be positive and max_iters >= 1")


@dataclass(frozen=True)
class AdmmSettings:
    rho: float = 1.0
    primal_tol: float = 1e-6
    dual_tol: float = 1e-6
    max_iters: int = 5000

    def __post_init__(self):
        if min(self.rho, self.primal_tol, self.dual_tol) <= 0 or self.max_iters < 1:
            raise NetgameError("ADMM settings must all be positive")


@dataclass(frozen=True)
class GroupSpec:
    """Disjoint player groups covering all indices (two groups supported)."""

    groups: tuple

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(int(i) for i in g) for g in self.groups))

    def validate(self, n_players: int) -> None:
        seen = [i for g in self.groups for i in g]
        if sorted(seen) != list(range(n_players)):
            raise InfeasibleInput("groups must partition the player set")


# ---------------------------------------------------------------------------
# layer one: best responses


def _pgd_minimize(grad, lipschitz, x0, lo, hi, tol=1e-9, max_iters=200_000):
    """Projected gradient descent on a smooth convex function over a box."""
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    step = 1.0 / max(lipschitz, 1e-12)
    for _ in range(max_iters):
        x_new = np.clip(x - step * grad(x), lo, hi)
        if np.max(np.abs(x_new - x)) < tol:
            return x_new
        x = x_new
    raise NoConvergence("projected gradient did not reach tolerance")


def best_response(
    i: int,
    u: np.ndarray,
    m_row: np.ndarray,
    config: GameConfig,
    method: str = "auto",
    tol: float = 1e-9,
) -> np.ndarray:
    """Minimizer of player i's cost in her own learning action.

    ``u`` is the full N x d action array (row i is ignored) and ``m_row`` the
    full-length link row of player i with a zero self-entry.

    For a quadratic loss the stationary point solves
    ((alpha/K) X + b I) u* = sum_j m_j u_j - (alpha / 2K) Y with b the row
    weight sum; when the raw features are retained and d >= K the inverse is
    applied through the Woodbury identity so only a K x K system is solved.
    The solution is clamped to the box and refined by projected gradient if
    the clamp was active (the clamped point need not be the constrained
    minimizer). Non-quadratic losses always take the projected-gradient
    path.
    """
    u = np.asarray(u, dtype=float)
    m_row = np.asarray(m_row, dtype=float)
    loss = config.loss(i)
    alpha = config.alpha[i]
    lo, hi = config.action_box
    b = float(m_row.sum())
    pull = m_row @ u  # sum_j m_j u_j

    quadratic = isinstance(loss, QuadraticLoss) and method != "pgd"
    if quadratic:
        scale = alpha / loss.K
        rhs = pull - 0.5 * scale * loss.Y
        use_smw = (
            method == "smw"
            or (method == "auto" and loss.features is not None and config.dim >= loss.K)
        )
        if use_smw and loss.features is None:
            raise NetgameError("the low-rank path needs the raw features")
        if b <= 0 and use_smw:
            use_smw = False
        if use_smw:
            V = np.sqrt(scale) * loss.features.T  # d x K
            core = b * np.eye(loss.K) + V.T @ V
            try:
                z = np.linalg.solve(core, V.T @ rhs)
            except np.linalg.LinAlgError as exc:
                raise SingularSystem(str(exc)) from exc
            raw = (rhs - V @ z) / b
        else:
            A = scale * loss.X + b * np.eye(config.dim)
            try:
                raw = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError as exc:
                raise SingularSystem(str(exc)) from exc
        out = np.clip(raw, lo, hi)
        if np.array_equal(out, raw):
            return out
        # clamp was active: polish to the true box-constrained minimizer
        x0 = out
    else:
        x0 = np.clip(u[i], lo, hi)

    lip = alpha * loss.grad_lipschitz() + 2.0 * b

    def grad(x):
        return alpha * loss.gradient(x) + 2.0 * (b * x - pull)

    return _pgd_minimize(grad, lip, x0, lo, hi, tol=tol)


def _brd_arrays(u0, m, config, settings, trace=None, iteration_offset=0):
    """Best-response sweeps on raw arrays; returns (u, converged, rounds)."""
    u = np.asarray(u0, dtype=float).copy()
    n = config.n_players
    converged = False
    rounds = 0
    for t in range(settings.max_iters):
        prev = u.copy()
        if settings.order == "sequential":
            for i in range(n):
                u[i] = best_response(i, u, m[i], config)
        else:
            for i in range(n):
                u[i] = best_response(i, prev, m[i], config)
        rounds = t + 1
        max_step = float(np.max(np.abs(u - prev)))
        if trace is not None:
            trace.append(
                TraceRecord(
                    iteration=iteration_offset + rounds,
                    layer="brd",
                    phi=potential_arrays(u, m, config),
                    max_step=max_step,
                )
            )
        if max_step < settings.tol:
            converged = True
            break
    return u, converged, rounds


def brd_run(s0: StrategyProfile, config: GameConfig, settings: BrdSettings | None = None):
    """Best-response dynamics under the fixed network of ``s0``.

    Returns ``(LearningProfile, RunTrace)``. The trace holds the potential
    after every round; hitting the iteration cap flags the trace instead of
    raising.
    """
    settings = settings or config.brd or BrdSettings()
    trace = RunTrace()
    u, converged, _ = _brd_arrays(s0.u, s0.m, config, settings, trace=trace)
    trace.converged = converged
    if not converged:
        trace.note = "best-response dynamics hit the iteration cap"
    return LearningProfile(u, config), trace


# ---------------------------------------------------------------------------
# layer two: network formation


def formation_greedy(i: int, u: np.ndarray, beta: float) -> np.ndarray:
    """Exact solution of player i's link LP by greedy fill.

    Costs are the squared distances to the other players' actions; weights
    are filled to 1 on the cheapest links until the budget is spent, leaving
    at most one fractional entry. Ties break on the lower player index.
    Returns a full-length row with a zero self-entry.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    if not 0.0 < beta <= n - 1:
        raise BudgetInfeasible(f"beta = {beta} outside (0, {n - 1}]")
    others = np.delete(np.arange(n), i)
    costs = np.einsum("jk,jk->j", u[others] - u[i], u[others] - u[i])
    order = others[np.lexsort((others, costs))]
    row = np.zeros(n)
    remaining = float(beta)
    for j in order:
        fill = min(1.0, remaining)
        row[j] = fill
        remaining -= fill
        if remaining <= 0.0:
            break
    return row


def _uniform_rows(config: GameConfig) -> np.ndarray:
    n = config.n_players
    m = np.tile((config.budget / (n - 1))[:, None], (1, n))
    np.fill_diagonal(m, 0.0)
    return m


def _symmetrize_feasible(m, config, tol=1e-12, max_iters=2000):
    """Alternate row projection and symmetrization until both hold."""
    n = config.n_players
    offdiag = [np.delete(np.arange(n), i) for i in range(n)]
    m = np.asarray(m, dtype=float).copy()
    np.fill_diagonal(m, 0.0)
    for _ in range(max_iters):
        m = 0.5 * (m + m.T)
        for i in range(n):
            m[i, offdiag[i]] = _accel.project_budget_box(
                m[i, offdiag[i]], config.budget[i], 1e-12
            )
        if np.max(np.abs(m - m.T)) < tol:
            return m
    raise BudgetInfeasible(
        "no symmetric network satisfies these budgets (alternating projection stalled)"
    )


def initial_network(config: GameConfig) -> np.ndarray:
    """Uniform feasible rows, symmetrized when the mode requires it."""
    m = _uniform_rows(config)
    if config.symmetric:
        m = _symmetrize_feasible(m, config)
    return m


def random_symmetric_network(config: GameConfig, rng: np.random.Generator) -> NetworkWeights:
    """A random point of the symmetric feasible polytope."""
    n = config.n_players
    m = rng.uniform(0.0, 1.0, size=(n, n))
    np.fill_diagonal(m, 0.0)
    m = _symmetrize_feasible(m, config)
    return NetworkWeights(m, config)


def admm_symmetric(
    u: np.ndarray,
    config: GameConfig,
    settings: AdmmSettings | None = None,
    m0: np.ndarray | None = None,
):
    """Decentralized undirected network formation for fixed learning actions.

    Each ordered pair keeps a primal weight and a dual variable; the scalar
    primal update

        m[i, j] <- m_bar[i, j] - (lambda[i, j] + c[i, j] / 2) / rho

    (c the squared action distances, m_bar the pairwise average from the
    previous sweep) is followed by a projection of every row onto its budget
    box, then the duals move against the fresh disagreement with the
    average. Terminates when the symmetry and average-change residuals drop
    below the tolerances. Returns ``(NetworkWeights, RunTrace)``; the final
    matrix is polished to an exactly symmetric, row-feasible point.

    The iteration is equivariant under joint scaling of the costs and the
    penalty, so ``settings.rho`` acts as a multiplier on a cost-scaled
    penalty (0.25 * max cost); a fixed penalty stalls when the actions have
    already been pulled close together and the costs are tiny.
    """
    u = np.asarray(u, dtype=float)
    if not config.symmetric:
        raise NotSymmetric("ADMM formation applies to the undirected mode")
    settings = settings or config.admm or AdmmSettings()
    n = config.n_players
    offdiag = [np.delete(np.arange(n), i) for i in range(n)]
    c = _accel.pairwise_sqdist(u)
    cost_scale = float(c.max())
    rho = settings.rho * (0.25 * cost_scale if cost_scale > 0.0 else 1.0)
    m = np.asarray(m0, dtype=float).copy() if m0 is not None else _uniform_rows(config)
    np.fill_diagonal(m, 0.0)
    lam = np.zeros((n, n))
    m_bar = 0.5 * (m + m.T)
    trace = RunTrace()
    converged = False
    for k in range(1, settings.max_iters + 1):
        m_new = m_bar - (lam + 0.5 * c) / rho
        np.fill_diagonal(m_new, 0.0)
        for i in range(n):
            m_new[i, offdiag[i]] = _accel.project_budget_box(
                m_new[i, offdiag[i]], config.budget[i], 1e-12
            )
        m_bar_new = 0.5 * (m_new + m_new.T)
        primal = float(np.max(np.abs(m_new - m_bar_new)))
        dual = float(np.max(np.abs(m_bar_new - m_bar)))
        lam += rho * (m_new - m_bar_new)
        np.fill_diagonal(lam, 0.0)
        m, m_bar = m_new, m_bar_new
        trace.append(TraceRecord(iteration=k, layer="admm", residual=max(primal, dual)))
        if primal < settings.primal_tol and dual < settings.dual_tol:
            converged = True
            break
    trace.converged = converged
    if not converged:
        trace.note = "ADMM hit the sweep cap"
    m = _symmetrize_feasible(m, config)
    return NetworkWeights(m, config), trace


def symmetric_formation_lp(c: np.ndarray, config: GameConfig) -> np.ndarray:
    """Centralized minimum-cost undirected network (one LP over the links).

    Variables are the undirected link weights in [0, 1]; each node's incident
    weights must sum to its budget. Solved with the HiGHS simplex/IPM via
    scipy. Returns the dense symmetric matrix.
    """
    n = config.n_players
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cost = np.array([c[i, j] for i, j in edges])
    A = np.zeros((n, len(edges)))
    for e, (i, j) in enumerate(edges):
        A[i, e] = 1.0
        A[j, e] = 1.0
    res = scipy.optimize.linprog(
        cost,
        A_eq=A,
        b_eq=np.asarray(config.budget, dtype=float),
        bounds=[(0.0, 1.0)] * len(edges),
        method="highs",
    )
    if res.status == 2:
        raise BudgetInfeasible("the symmetric network polytope is empty")
    if not res.success:
        raise NoConvergence(f"link LP failed: {res.message}")
    m = np.zeros((n, n))
    for e, (i, j) in enumerate(edges):
        m[i, j] = m[j, i] = res.x[e]
    return m


# ---------------------------------------------------------------------------
# joint potential minimization and the outer algorithm


def minimize_potential_u(
    m: np.ndarray, config: GameConfig, u0: np.ndarray | None = None, tol: float = 1e-10
) -> np.ndarray:
    """Exact minimizer of the potential over the learning actions, m fixed.

    All-quadratic losses give one linear block system; if its solution leaves
    the box (or a loss is not quadratic) the minimum is found by tight
    sequential best-response sweeps, which coordinate-minimize the potential
    when m is symmetric.
    """
    m = np.asarray(m, dtype=float)
    if np.max(np.abs(m - m.T)) > config.feas_tol:
        raise NotSymmetric("potential minimization over u assumes an undirected network")
    n, d = config.n_players, config.dim
    lo, hi = config.action_box
    if all(isinstance(l, QuadraticLoss) for l in config.losses):
        A = np.zeros((n * d, n * d))
        rhs = np.zeros(n * d)
        w = m + m.T
        for i in range(n):
            loss = config.losses[i]
            scale = config.alpha[i] / loss.K
            block = 2.0 * scale * loss.X + w[i].sum() * np.eye(d)
            A[i * d : (i + 1) * d, i * d : (i + 1) * d] = block
            rhs[i * d : (i + 1) * d] = -scale * loss.Y
            for j in range(n):
                if j != i:
                    A[i * d : (i + 1) * d, j * d : (j + 1) * d] = -w[i, j] * np.eye(d)
        try:
            sol = np.linalg.solve(A, rhs)
            good = np.allclose(A @ sol, rhs, atol=1e-8)
        except np.linalg.LinAlgError:
            good = False
        if good:
            u = sol.reshape(n, d)
            if np.all(u >= lo) and np.all(u <= hi):
                return u
    start = u0 if u0 is not None else np.zeros((n, d))
    settings = BrdSettings(order="sequential", tol=tol, max_iters=20_000)
    u, converged, _ = _brd_arrays(start, m, config, settings)
    if not converged:
        raise NoConvergence("potential minimization over u did not converge")
    return u


def run_algorithm1(config: GameConfig, s0: StrategyProfile | None = None):
    """Alternate best-response learning and network formation.

    Layer one runs best-response dynamics under the current network; layer
    two re-optimizes the links (decentralized ADMM in undirected mode, exact
    greedy rows otherwise). The outer loop stops when one full round moves
    the potential by less than ``config.outer_tol``. A formation result that
    would increase the potential is discarded, which keeps the potential
    trace nonincreasing across every layer boundary in undirected mode.

    Returns ``(StrategyProfile, RunTrace)``; non-converged inner solvers
    flag the trace.
    """
    validate_config(config)
    rng = np.random.default_rng(config.seed)
    lo, hi = config.action_box
    if s0 is not None:
        u, m = s0.u.copy(), s0.m.copy()
    else:
        u = rng.uniform(lo, hi, size=(config.n_players, config.dim))
        m = initial_network(config)
    brd_settings = config.brd or BrdSettings()
    admm_settings = config.admm or AdmmSettings()

    trace = RunTrace()
    it = 0
    phi = potential_arrays(u, m, config)
    trace.append(
        TraceRecord(
            iteration=it,
            layer="init",
            phi=phi,
            welfare=social_welfare(u, config),
            costs=player_costs(u, m, config),
        )
    )
    phi_outer = phi
    converged = False
    for _ in range(config.outer_max_iters):
        u, brd_ok, _ = _brd_arrays(u, m, config, brd_settings)
        if not brd_ok:
            trace.converged = False
            trace.note = "best-response layer hit its iteration cap"
        it += 1
        phi_brd = potential_arrays(u, m, config)
        trace.append(
            TraceRecord(
                iteration=it,
                layer="brd",
                phi=phi_brd,
                welfare=social_welfare(u, config),
                costs=player_costs(u, m, config),
            )
        )

        residual = None
        if config.symmetric:
            network, admm_trace = admm_symmetric(u, config, admm_settings, m0=m)
            m_new = network.m
            if not admm_trace.converged:
                trace.converged = False
                trace.note = "formation layer hit its sweep cap"
            if admm_trace.records:
                residual = admm_trace.records[-1].residual
        else:
            m_new = np.zeros_like(m)
            for i in range(config.n_players):
                m_new[i] = formation_greedy(i, u, config.budget[i])
        phi_new = potential_arrays(u, m_new, config)
        if phi_new <= phi_brd + 1e-12:
            m = m_new
            phi_form = phi_new
        else:
            # inexact formation would raise the potential: keep the old links
            phi_form = phi_brd
        it += 1
        trace.append(
            TraceRecord(
                iteration=it,
                layer="formation",
                phi=phi_form,
                welfare=social_welfare(u, config),
                costs=player_costs(u, m, config),
                residual=residual,
            )
        )
        if abs(phi_outer - phi_form) < config.outer_tol:
            converged = True
            break
        phi_outer = phi_form
    if not converged:
        trace.converged = False
        if not trace.note:
            trace.note = "outer loop hit its round cap"
    profile = StrategyProfile.from_arrays(u, m, config)
    return profile, trace


def joint_minimize(config: GameConfig, m0: np.ndarray | None = None, tol: float | None = None):
    """Minimize the potential jointly by exact alternating block solves.

    The u-step is the convex solve of :func:`minimize_potential_u`; the
    m-step is the centralized link LP under the symmetry constraint. Both
    steps are exact block minimizations, so the potential is nonincreasing.
    """
    validate_config(config)
    if not config.symmetric:
        raise NotSymmetric("joint minimization is defined for the undirected mode")
    tol = config.outer_tol if tol is None else tol
    m = np.asarray(m0, dtype=float).copy() if m0 is not None else initial_network(config)
    trace = RunTrace()
    phi_prev = np.inf
    u = None
    it = 0
    for _ in range(200):
        u = minimize_potential_u(m, config, u0=u)
        it += 1
        trace.append(
            TraceRecord(iteration=it, layer="u-step", phi=potential_arrays(u, m, config))
        )
        m_new = symmetric_formation_lp(_accel.pairwise_sqdist(u), config)
        phi_new = potential_arrays(u, m_new, config)
        if phi_new <= trace.records[-1].phi + 1e-12:
            m = m_new
        else:
            phi_new = trace.records[-1].phi
        it += 1
        trace.append(TraceRecord(iteration=it, layer="m-step", phi=phi_new))
        if abs(phi_prev - phi_new) < tol:
            return StrategyProfile.from_arrays(u, m, config), trace
        phi_prev = phi_new
    raise NoConvergence("joint potential minimization did not settle")


# ---------------------------------------------------------------------------
# consensus baseline and welfare comparison


def consensus_baseline(config: GameConfig, exact: bool = True):
    """Best single shared parameter and its pooled cost.

    Minimizes the alpha-weighted sum of all local losses over one shared
    action in the box. Quadratic losses give a closed form (with a
    projected-gradient polish if the box binds); other losses run projected
    gradient directly. Returns ``(u_star, total_cost)``.
    """
    validate_config(config)
    d = config.dim
    lo, hi = config.action_box

    def total_grad(x):
        g = np.zeros(d)
        for i in range(config.n_players):
            g += config.alpha[i] * config.losses[i].gradient(x)
        return g

    lip = sum(
        config.alpha[i] * config.losses[i].grad_lipschitz()
        for i in range(config.n_players)
    )

    u_star = None
    if all(isinstance(l, QuadraticLoss) for l in config.losses):
        A = np.zeros((d, d))
        rhs = np.zeros(d)
        for i in range(config.n_players):
            loss = config.losses[i]
            scale = config.alpha[i] / loss.K
            A += 2.0 * scale * loss.X
            rhs += -scale * loss.Y
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
        if np.all(sol >= lo) and np.all(sol <= hi):
            u_star = sol
        else:
            u_star = _pgd_minimize(total_grad, lip, np.clip(sol, lo, hi), lo, hi, tol=1e-12)
    else:
        u_star = _pgd_minimize(total_grad, lip, np.zeros(d), lo, hi, tol=1e-12)

    total = sum(
        config.alpha[i] * config.losses[i].value(u_star, exact=exact)
        for i in range(config.n_players)
    )
    return u_star, float(total)


@dataclass(frozen=True)
class WelfareReport:
    p1_star: float
    p2_star: float
    welfare_1: float
    welfare_2: float
    u_game: np.ndarray
    u_consensus: np.ndarray


def welfare_gap(
    config: GameConfig, network: NetworkWeights | None = None, exact: bool = True
) -> WelfareReport:
    """Compare soft-consensus learning with the hard-consensus baseline.

    For the given undirected network (a seeded random feasible one when
    omitted), computes the minimum of the potential over the learning
    actions and the pooled single-parameter optimum, then checks the
    provable relations: the former never exceeds the latter, and its welfare
    is never worse. A violation raises ``TheoremViolation`` since it can
    only come from an implementation bug.
    """
    validate_config(config)
    if not config.symmetric:
        raise NotSymmetric("the welfare comparison assumes an undirected network")
    if network is None:
        network = random_symmetric_network(config, np.random.default_rng(config.seed))
    m = network.m
    u1 = minimize_potential_u(m, config)
    p1 = potential_arrays(u1, m, config, exact=exact)
    u2, p2 = consensus_baseline(config, exact=exact)
    w1 = social_welfare(u1, config, exact=exact)
    w2 = -p2
    if p1 > p2 + 1e-9:
        raise TheoremViolation(f"P1* = {p1} exceeds P2* = {p2}")
    if w1 < w2 - 1e-9:
        raise TheoremViolation(f"welfare {w1} fell below the baseline {w2}")
    return WelfareReport(float(p1), float(p2), float(w1), float(w2), u1, u2)


def direction_group_decomposition(m, m_prime, groups: GroupSpec, tol: float = 1e-9):
    """Split a feasible link-weight change into within-group and cross sums.

    Both networks must be symmetric with identical per-node weight sums
    (same budgets). Each undirected link is counted once. Per-node
    feasibility forces the two within-group totals to coincide and to equal
    minus half the cross-group total; both identities are checked here.
    """
    a = np.asarray(getattr(m, "m", m), dtype=float)
    b = np.asarray(getattr(m_prime, "m", m_prime), dtype=float)
    n = a.shape[0]
    if a.shape != b.shape or a.shape != (n, n):
        raise InfeasibleInput("networks must be square and of equal size")
    if len(groups.groups) != 2:
        raise InfeasibleInput("exactly two groups are supported")
    groups.validate(n)
    for mat in (a, b):
        if np.max(np.abs(mat - mat.T)) > tol:
            raise InfeasibleInput("both networks must be symmetric")
    if np.max(np.abs(a.sum(axis=1) - b.sum(axis=1))) > tol:
        raise InfeasibleInput("networks must share the same per-node weight sums")

    p = b - a
    g1, g2 = (set(g) for g in groups.groups)
    within = np.zeros(2)
    cross = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if i in g1 and j in g1:
                within[0] += p[i, j]
            elif i in g2 and j in g2:
                within[1] += p[i, j]
            else:
                cross += p[i, j]
    if abs(within[0] - within[1]) > tol or abs(within[0] + 0.5 * cross) > tol:
        raise InfeasibleInput(
            "direction sums violate the group identity; inputs are not group-feasible"
        )
    return within, float(cross)
