"""Experiment harness: config files, subcommands and plot-ready outputs.

Config files are flat ``key = value`` text under ``[section]`` headers;
unknown sections or keys are rejected so typos fail fast. Outputs are
headered CSV files plus a ``key = value`` summary, written only after the
config has parsed and validated. Identical config and seed produce
byte-identical files.

Exit codes: 0 success, 1 config error, 2 solver non-convergence (outputs
still written, flagged), 3 invariant violation.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import os
import sys
from pathlib import Path

import numpy as np

from . import commutative, data, game, omd, streaming
from .core import (
    GameConfig,
    NetgameError,
    NetworkWeights,
    StrategyProfile,
    TheoremViolation,
    row_feasible,
    validate_config,
)
from .losses import LogisticLoss, QuadraticLoss, quadratic_from_arrays
from .trace import RunTrace


class ConfigError(NetgameError):
    pass


_SCHEMA = {
    "game": {"n_players", "dim", "alpha", "budget", "box_lo", "box_hi", "symmetric", "seed"},
    "data": {
        "source",
        "path",
        "feature_columns",
        "label_column",
        "normalize",
        "binarize",
        "loss",
        "model",
        "delta",
        "per_node",
        "noise_sigma",
        "pool_size",
    },
    "partition": {"mode", "per_node"},
    "solver": {
        "brd_order",
        "brd_tol",
        "brd_max_iters",
        "admm_rho",
        "admm_primal_tol",
        "admm_dual_tol",
        "admm_max_iters",
        "outer_tol",
        "outer_max_iters",
    },
    "omd": {
        "geometry",
        "p",
        "gamma0",
        "exponent",
        "rounds",
        "noise",
        "sigma",
        "record_every",
        "ref_profile",
        "start_at_reference",
    },
    "streaming": {"node", "partners", "events", "max_points"},
    "welfare": {"n_seeds"},
    "output": {"dir", "emit_costs"},
}


def _parse_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    sections = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        keys = dict(parser.items(section))
        unknown = set(keys) - _SCHEMA[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        sections[section] = keys
    if "game" not in sections:
        raise ConfigError("config must contain a [game] section")
    return sections


def _get(sections, section, key, default=None):
    return sections.get(section, {}).get(key, default)


def _get_int(sections, section, key, default=None):
    raw = _get(sections, section, key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key {key} in [{section}]")
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} must be an integer, got {raw!r}") from exc


def _get_float(sections, section, key, default=None):
    raw = _get(sections, section, key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key {key} in [{section}]")
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} must be a number, got {raw!r}") from exc


def _get_bool(sections, section, key, default=False):
    raw = _get(sections, section, key)
    if raw is None:
        return default
    if raw.lower() in ("true", "1", "yes"):
        return True
    if raw.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"[{section}] {key} must be true or false, got {raw!r}")


def _get_scalar_or_list(sections, section, key, default):
    raw = _get(sections, section, key)
    if raw is None:
        return default
    try:
        parts = [float(p) for p in raw.split(",")]
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} must be a number or comma list") from exc
    return parts[0] if len(parts) == 1 else parts


def _build_game_config(sections, seed_override=None) -> GameConfig:
    n = _get_int(sections, "game", "n_players")
    dim = _get_int(sections, "game", "dim")
    seed = seed_override if seed_override is not None else _get_int(sections, "game", "seed", 0)
    brd = commutative.BrdSettings(
        order=_get(sections, "solver", "brd_order", "sequential"),
        tol=_get_float(sections, "solver", "brd_tol", 1e-8),
        max_iters=_get_int(sections, "solver", "brd_max_iters", 1000),
    )
    admm = commutative.AdmmSettings(
        rho=_get_float(sections, "solver", "admm_rho", 1.0),
        primal_tol=_get_float(sections, "solver", "admm_primal_tol", 1e-6),
        dual_tol=_get_float(sections, "solver", "admm_dual_tol", 1e-6),
        max_iters=_get_int(sections, "solver", "admm_max_iters", 5000),
    )
    schedule = omd.StepSchedule(
        gamma0=_get_float(sections, "omd", "gamma0", 0.5),
        exponent=_get_float(sections, "omd", "exponent", 0.6),
    )
    noise = omd.NoiseModel(
        kind=_get(sections, "omd", "noise", "none"),
        sigma=_get_float(sections, "omd", "sigma", 0.0),
    )
    try:
        config = GameConfig(
            n_players=n,
            dim=dim,
            alpha=_get_scalar_or_list(sections, "game", "alpha", 1.0),
            budget=_get_scalar_or_list(sections, "game", "budget", 1.0),
            action_box=(
                _get_float(sections, "game", "box_lo", -10.0),
                _get_float(sections, "game", "box_hi", 10.0),
            ),
            symmetric=_get_bool(sections, "game", "symmetric", True),
            seed=seed,
            brd=brd,
            admm=admm,
            schedule=schedule,
            noise=noise,
            outer_tol=_get_float(sections, "solver", "outer_tol", 1e-6),
            outer_max_iters=_get_int(sections, "solver", "outer_max_iters", 100),
        )
    except NetgameError as exc:
        raise ConfigError(str(exc)) from exc
    return config


def _build_datasets(sections, config: GameConfig) -> list[data.Dataset]:
    source = _get(sections, "data", "source")
    if source is None:
        raise ConfigError("missing required key source in [data]")
    n = config.n_players
    if source == "synth":
        model = (_get(sections, "data", "model", "shared"), _get_float(sections, "data", "delta", 0.0) or None)
        if model[0] == "per_node_shift":
            model = ("per_node_shift", _get_float(sections, "data", "delta"))
        else:
            model = ("shared", None)
        return data.synth_generate(
            n_nodes=n,
            per_node=_get_int(sections, "data", "per_node", 32),
            d=config.dim,
            model=model,
            noise_sigma=_get_float(sections, "data", "noise_sigma", 0.0),
            seed=config.seed,
        )
    if source == "synth_pool":
        pool = data.synth_generate(
            n_nodes=1,
            per_node=_get_int(sections, "data", "pool_size"),
            d=config.dim,
            model=("shared", None),
            noise_sigma=_get_float(sections, "data", "noise_sigma", 0.0),
            seed=config.seed,
        )[0]
        spec = data.PartitionSpec(
            n_nodes=n,
            mode=_get(sections, "partition", "mode", "unbiased"),
            seed=config.seed,
            per_node=(
                _get_int(sections, "partition", "per_node")
                if _get(sections, "partition", "per_node")
                else None
            ),
        )
        return data.partition(pool, spec)
    if source == "csv":
        cols = _get(sections, "data", "feature_columns")
        label = _get(sections, "data", "label_column")
        path = _get(sections, "data", "path")
        if not (cols and label and path):
            raise ConfigError("[data] csv source needs path, feature_columns and label_column")
        try:
            ds = data.load_csv(
                path,
                [c.strip() for c in cols.split(",")],
                label,
                normalize=_get_bool(sections, "data", "normalize", False),
            )
        except (FileNotFoundError, NetgameError) as exc:
            raise ConfigError(str(exc)) from exc
        binarize = _get(sections, "data", "binarize", "none")
        if binarize == "median":
            ds = data.binarize_labels(ds, "median")
        elif binarize not in ("none", None):
            ds = data.binarize_labels(ds, float(binarize))
        spec = data.PartitionSpec(
            n_nodes=n,
            mode=_get(sections, "partition", "mode", "unbiased"),
            seed=config.seed,
            per_node=(
                _get_int(sections, "partition", "per_node")
                if _get(sections, "partition", "per_node")
                else None
            ),
        )
        try:
            return data.partition(ds, spec)
        except NetgameError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown data source {source!r}")


def _build_losses(datasets, sections):
    kind = _get(sections, "data", "loss", "quadratic")
    if kind == "quadratic":
        return tuple(quadratic_from_arrays(ds.features, ds.labels) for ds in datasets)
    if kind == "logistic":
        try:
            return tuple(LogisticLoss(ds.features, ds.labels) for ds in datasets)
        except NetgameError as exc:
            raise ConfigError(f"logistic loss needs labels in -1/+1 (binarize first): {exc}") from exc
    raise ConfigError(f"unknown loss kind {kind!r}")


def _load_experiment(config_path, seed_override=None):
    sections = _parse_config(config_path)
    config = _build_game_config(sections, seed_override)
    datasets = _build_datasets(sections, config)
    losses = _build_losses(datasets, sections)
    config = GameConfig(
        n_players=config.n_players,
        dim=config.dim,
        alpha=config.alpha,
        budget=config.budget,
        action_box=config.action_box,
        symmetric=config.symmetric,
        losses=losses,
        seed=config.seed,
        brd=config.brd,
        admm=config.admm,
        schedule=config.schedule,
        noise=config.noise,
        outer_tol=config.outer_tol,
        outer_max_iters=config.outer_max_iters,
    )
    try:
        validate_config(config)
    except NetgameError as exc:
        raise ConfigError(str(exc)) from exc
    return sections, config, datasets


# ---------------------------------------------------------------------------
# output writers (repr keeps float round-trips byte-stable)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_lines(path: Path, lines) -> None:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_matrix_csv(path: Path, m: np.ndarray) -> None:
    n = m.shape[0]
    lines = ["node," + ",".join(str(j) for j in range(n))]
    for i in range(n):
        lines.append(str(i) + "," + ",".join(repr(float(v)) for v in m[i]))
    _write_lines(path, lines)


def write_trace_csv(path: Path, trace: RunTrace, n_players: int, emit_costs: bool) -> None:
    cols = ["iteration", "layer", "phi", "welfare", "max_step", "residual", "dist_ref"]
    if emit_costs:
        cols += [f"cost_{i}" for i in range(n_players)]
    lines = [",".join(cols)]
    for row in trace.to_rows():
        lines.append(",".join(_fmt(row.get(c)) for c in cols))
    _write_lines(path, lines)


def write_summary(path: Path, entries: dict) -> None:
    _write_lines(path, [f"{k} = {_fmt(v)}" for k, v in entries.items()])


def write_profile_csv(path: Path, u: np.ndarray, m: np.ndarray) -> None:
    lines = ["block,i,j,value"]
    for i in range(u.shape[0]):
        for j in range(u.shape[1]):
            lines.append(f"u,{i},{j},{repr(float(u[i, j]))}")
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            lines.append(f"m,{i},{j},{repr(float(m[i, j]))}")
    _write_lines(path, lines)


def read_profile_csv(path, config: GameConfig) -> StrategyProfile:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"profile file {path} not found")
    u = np.zeros((config.n_players, config.dim))
    m = np.zeros((config.n_players, config.n_players))
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "block,i,j,value":
            raise ConfigError(f"unexpected profile header {header!r}")
        for line in fh:
            block, i, j, value = line.strip().split(",")
            if block == "u":
                u[int(i), int(j)] = float(value)
            elif block == "m":
                m[int(i), int(j)] = float(value)
            else:
                raise ConfigError(f"unknown profile block {block!r}")
    return StrategyProfile.from_arrays(u, m, config)


def _network_summary(m: np.ndarray, config: GameConfig) -> dict:
    n = config.n_players
    off = ~np.eye(n, dtype=bool)
    zeros = int(np.sum(np.abs(m[off]) <= 1e-6))
    feasible = all(
        row_feasible(np.delete(m[i], i), config.budget[i], max(config.feas_tol, 1e-6))
        for i in range(n)
    )
    return {
        "network_zero_entries": zeros,
        "network_zero_fraction": zeros / (n * (n - 1)),
        "network_rows_feasible": feasible,
    }


def _out_dir(sections, out_override) -> Path:
    raw = out_override or _get(sections, "output", "dir", "out")
    path = Path(raw)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# subcommands


def run_commutative(config_path, out_override=None, seed_override=None) -> int:
    sections, config, _ = _load_experiment(config_path, seed_override)
    emit_costs = _get_bool(sections, "output", "emit_costs", True)
    profile, trace = commutative.run_algorithm1(config)
    out = _out_dir(sections, out_override)
    write_matrix_csv(out / "network.csv", profile.m)
    write_trace_csv(out / "trace.csv", trace, config.n_players, emit_costs)
    write_profile_csv(out / "profile.csv", profile.u, profile.m)
    summary = {
        "command": "run-commutative",
        "seed": config.seed,
        "n_players": config.n_players,
        "dim": config.dim,
        "symmetric": config.symmetric,
        "phi_final": trace.records[-1].phi,
        "welfare_exact": game.social_welfare(profile.u, config, exact=True),
        "converged": trace.converged,
        "note": trace.note,
    }
    if config.symmetric:
        u_star = commutative.minimize_potential_u(profile.m, config, u0=profile.u)
        summary["p1_star"] = game.potential_arrays(u_star, profile.m, config, exact=True)
    summary.update(_network_summary(profile.m, config))
    write_summary(out / "summary.txt", summary)
    return 0 if trace.converged else 2


def run_concurrent(config_path, out_override=None, seed_override=None) -> int:
    sections, config, _ = _load_experiment(config_path, seed_override)
    emit_costs = _get_bool(sections, "output", "emit_costs", True)
    geometry = omd.BregmanGeometry(
        kind=_get(sections, "omd", "geometry", "euclidean"),
        p=_get_float(sections, "omd", "p", 2.0),
    )
    rounds = _get_int(sections, "omd", "rounds", 10_000)
    record_every = _get_int(sections, "omd", "record_every", max(1, rounds // 1000))
    ref_path = _get(sections, "omd", "ref_profile")
    reference = read_profile_csv(ref_path, config) if ref_path else None
    rng = np.random.default_rng(config.seed)
    if reference is not None and _get_bool(sections, "omd", "start_at_reference", False):
        s0 = reference
    else:
        lo, hi = config.action_box
        u0 = rng.uniform(lo, hi, size=(config.n_players, config.dim))
        m0 = commutative.initial_network(config)
        s0 = StrategyProfile.from_arrays(u0, m0, config)
    profile, trace = omd.omd_run(
        s0,
        config,
        geom=geometry,
        max_rounds=rounds,
        reference=reference,
        record_every=record_every,
    )
    out = _out_dir(sections, out_override)
    write_matrix_csv(out / "network.csv", profile.m)
    write_trace_csv(out / "trace.csv", trace, config.n_players, emit_costs)
    write_profile_csv(out / "profile.csv", profile.u, profile.m)
    summary = {
        "command": "run-concurrent",
        "seed": config.seed,
        "rounds": rounds,
        "geometry": geometry.kind,
        "noise": (config.noise.kind if config.noise else "none"),
        "phi_final": trace.records[-1].phi,
        "welfare_exact": game.social_welfare(profile.u, config, exact=True),
        "final_max_step": trace.records[-1].max_step,
    }
    if reference is not None:
        dist = trace.records[-1].dist_ref
        summary["dist_to_reference"] = dist
        summary["stayed_near_reference"] = bool(dist is not None and dist < 1e-6)
    summary.update(_network_summary(profile.m, config))
    write_summary(out / "summary.txt", summary)
    return 0


def _parse_events(raw: str):
    events = []
    if not raw:
        return events
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            name, step = part.split("@")
            step = int(step)
        except ValueError as exc:
            raise ConfigError(f"events must look like connect@500, got {part!r}") from exc
        if name not in ("connect", "disconnect"):
            raise ConfigError(f"unknown event {name!r}")
        events.append((step, name))
    return sorted(events)


def run_streaming(config_path, out_override=None, seed_override=None) -> int:
    sections, config, datasets = _load_experiment(config_path, seed_override)
    node = _get_int(sections, "streaming", "node", 0)
    if not 0 <= node < config.n_players:
        raise ConfigError(f"focal node {node} out of range")
    events = _parse_events(_get(sections, "streaming", "events", ""))
    raw_partners = _get(sections, "streaming", "partners", "")
    if raw_partners:
        partners = [int(p) for p in raw_partners.split(",")]
    else:
        partners = [j for j in range(config.n_players) if j != node]
    if node in partners:
        raise ConfigError("the focal node cannot be its own partner")

    # reference actions: every other node's own-data minimizer
    neighbor_u = np.zeros((config.n_players, config.dim))
    for j in range(config.n_players):
        loss = config.losses[j]
        if isinstance(loss, QuadraticLoss):
            neighbor_u[j] = np.linalg.lstsq(2.0 * loss.X, -loss.Y, rcond=None)[0]

    connected_row = np.zeros(config.n_players)
    share = config.budget[node] / len(partners)
    if share > 1.0:
        raise ConfigError("budget exceeds one unit per partner")
    for j in partners:
        connected_row[j] = share

    focal = datasets[node]
    max_points = _get_int(sections, "streaming", "max_points", focal.n_rows)
    points = list(zip(focal.features[:max_points], focal.labels[:max_points]))
    eval_loss = quadratic_from_arrays(focal.features, focal.labels)

    alpha = config.alpha[node]
    d = config.dim
    connected = False
    state = None
    seen_x = []
    seen_y = []
    X_acc = np.zeros((d, d))
    Y_acc = np.zeros(d)
    loss_dynamic = []
    loss_isolated = []
    event_lines = []
    for step, (x, y) in enumerate(points, start=1):
        for estep, name in events:
            if estep == step:
                connected = name == "connect"
                state = None
                event_lines.append(f"step={step} event={name}")
        seen_x.append(x)
        seen_y.append(y)
        X_acc += np.outer(x, x)
        Y_acc += -2.0 * x * y
        u_iso = np.linalg.lstsq(2.0 * X_acc, -Y_acc, rcond=None)[0]
        if connected:
            if state is None:
                state = streaming.state_from_batch(
                    list(zip(seen_x, seen_y)), connected_row, neighbor_u, config, node=node
                )
            else:
                state = streaming.stream_update(state, (x, y))
            u_dyn = state.u
        else:
            u_dyn = u_iso
        loss_dynamic.append(eval_loss.value(u_dyn, exact=True))
        loss_isolated.append(eval_loss.value(u_iso, exact=True))

    out = _out_dir(sections, out_override)
    lines = ["step,loss_dynamic,loss_isolated"]
    for step in range(len(points)):
        lines.append(
            f"{step + 1},{repr(float(loss_dynamic[step]))},{repr(float(loss_isolated[step]))}"
        )
    _write_lines(out / "stream_trace.csv", lines)
    _write_lines(out / "events.txt", event_lines or ["no events"])
    windows = [(s, n) for s, n in events]
    summary = {
        "command": "run-streaming",
        "seed": config.seed,
        "node": node,
        "points": len(points),
        "events": ";".join(f"{n}@{s}" for s, n in windows),
        "mean_loss_dynamic": float(np.mean(loss_dynamic)),
        "mean_loss_isolated": float(np.mean(loss_isolated)),
    }
    connect_steps = [s for s, n in events if n == "connect"]
    disconnect_steps = [s for s, n in events if n == "disconnect"]
    if connect_steps:
        a = connect_steps[0]
        b = disconnect_steps[0] if disconnect_steps else len(points) + 1
        window = slice(a - 1, min(b - 1, len(points)))
        summary["window_mean_loss_connected"] = float(np.mean(loss_dynamic[window]))
        summary["window_mean_loss_isolated"] = float(np.mean(loss_isolated[window]))
    write_summary(out / "summary.txt", summary)
    return 0


def _welfare_row(sections, base_config: GameConfig, seed: int):
    config = GameConfig(
        n_players=base_config.n_players,
        dim=base_config.dim,
        alpha=base_config.alpha,
        budget=base_config.budget,
        action_box=base_config.action_box,
        symmetric=True,
        losses=_build_losses(_rebuild_datasets_for_seed(sections, base_config, seed), sections),
        seed=seed,
    )
    report = commutative.welfare_gap(config)
    return (seed, report.p1_star, report.p2_star, report.welfare_1, report.welfare_2)


def _rebuild_datasets_for_seed(sections, base_config: GameConfig, seed: int):
    shadow = GameConfig(
        n_players=base_config.n_players,
        dim=base_config.dim,
        alpha=base_config.alpha,
        budget=base_config.budget,
        action_box=base_config.action_box,
        symmetric=base_config.symmetric,
        seed=seed,
    )
    return _build_datasets(sections, shadow)


def compare_welfare(config_path, out_override=None, seed_override=None) -> int:
    sections, config, _ = _load_experiment(config_path, seed_override)
    if not config.symmetric:
        raise ConfigError("the welfare comparison needs symmetric = true")
    n_seeds = _get_int(sections, "welfare", "n_seeds", 20)
    seeds = [config.seed + k for k in range(n_seeds)]
    workers = int(os.environ.get("NETGAME_THREADS", "1") or "1")
    rows = []
    violations = []
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_welfare_row, sections, config, s): s for s in seeds}
            for fut in concurrent.futures.as_completed(futures):
                seed = futures[fut]
                try:
                    rows.append(fut.result())
                except TheoremViolation as exc:
                    violations.append((seed, str(exc)))
    else:
        for seed in seeds:
            try:
                rows.append(_welfare_row(sections, config, seed))
            except TheoremViolation as exc:
                violations.append((seed, str(exc)))
    rows.sort(key=lambda r: r[0])
    out = _out_dir(sections, out_override)
    lines = ["seed,p1_star,p2_star,welfare_1,welfare_2"]
    for seed, p1, p2, w1, w2 in rows:
        lines.append(f"{seed},{repr(p1)},{repr(p2)},{repr(w1)},{repr(w2)}")
    _write_lines(out / "welfare.csv", lines)
    summary = {
        "command": "compare-welfare",
        "seeds": n_seeds,
        "rows_written": len(rows),
        "violations": len(violations),
        "all_bounds_hold": not violations,
    }
    write_summary(out / "summary.txt", summary)
    return 3 if violations else 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="netgame",
        description="Distributed-learning game simulator: solvers and experiment harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run-commutative", "run-concurrent", "run-streaming", "compare-welfare"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the experiment config file")
        p.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
        p.add_argument("--seed", type=int, default=None, help="override the [game] seed")
    args = parser.parse_args(argv)
    handlers = {
        "run-commutative": run_commutative,
        "run-concurrent": run_concurrent,
        "run-streaming": run_streaming,
        "compare-welfare": compare_welfare,
    }
    try:
        return handlers[args.command](args.config, args.out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except TheoremViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except NetgameError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
