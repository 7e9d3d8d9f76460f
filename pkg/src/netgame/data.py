"""Dataset ingestion, label preparation, node partitions and synthetic data.

A dataset is a feature matrix plus labels. Partitioning across nodes is
either unbiased (seeded shuffle, contiguous equal blocks) or biased (stable
sort by label, so nearby node indices receive similar data). The synthetic
generator provides deterministic fixtures.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DimensionMismatch, NetgameError

VARIANCE_FLOOR = 1e-12


class MissingColumn(NetgameError):
    pass


class NoValidRows(NetgameError):
    pass


class TooFewRows(NetgameError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    columns: tuple = ()
    provenance: str = ""

    def __post_init__(self):
        F = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float).reshape(-1)
        if F.ndim != 2 or F.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"features {F.shape} and labels {y.shape} do not align")
        if not (np.all(np.isfinite(F)) and np.all(np.isfinite(y))):
            raise NetgameError("non-finite values survived cleaning")
        object.__setattr__(self, "features", F)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def take(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], self.columns, self.provenance)


@dataclass(frozen=True)
class PartitionSpec:
    """How to split one dataset across nodes.

    ``per_node`` caps each node's rows; None means an equal split of the
    whole set with the remainder going to the low indices.
    """

    n_nodes: int
    mode: str = "unbiased"
    seed: int = 0
    per_node: int | None = None

    def __post_init__(self):
        if self.mode not in ("unbiased", "biased"):
            raise NetgameError(f"unknown partition mode {self.mode!r}")
        if self.n_nodes < 1:
            raise NetgameError("need at least one node")
        if self.per_node is not None and self.per_node < 1:
            raise NetgameError("per-node size must be >= 1")


def load_csv(path, feature_columns, label_column, normalize: bool = False) -> Dataset:
    """Read a headered comma-separated file into a dataset.

    Rows with unparseable fields in the selected columns are skipped; the
    skip count lands in the provenance string. ``normalize`` standardizes
    each feature column (zero mean, unit variance on the loaded rows; a
    constant column maps to zeros via the variance floor).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    feature_columns = list(feature_columns)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in feature_columns + [label_column]:
            if col not in header:
                raise MissingColumn(f"column {col!r} not in header {header}")
        rows = []
        labels = []
        skipped = 0
        for record in reader:
            try:
                feats = [float(record[c]) for c in feature_columns]
                label = float(record[label_column])
            except (TypeError, ValueError):
                skipped += 1
                continue
            rows.append(feats)
            labels.append(label)
    if not rows:
        raise NoValidRows(f"no parseable rows in {path}")
    F = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    if normalize:
        mean = F.mean(axis=0)
        var = F.var(axis=0)
        F = (F - mean) / np.sqrt(np.maximum(var, VARIANCE_FLOOR))
        F[:, var <= VARIANCE_FLOOR] = 0.0
    return Dataset(
        F,
        y,
        columns=tuple(feature_columns),
        provenance=f"{path.name}: {len(rows)} rows kept, {skipped} skipped",
    )


def binarize_labels(dataset: Dataset, threshold="median") -> Dataset:
    """Map labels to +1 above the threshold and -1 at or below it.

    ``threshold`` is either the string ``"median"`` (computed on the whole
    dataset) or a numeric cut point.
    """
    cut = float(np.median(dataset.labels)) if threshold == "median" else float(threshold)
    labels = np.where(dataset.labels > cut, 1.0, -1.0)
    return Dataset(dataset.features, labels, dataset.columns, dataset.provenance)


def _block_sizes(total: int, spec: PartitionSpec) -> list[int]:
    if spec.per_node is not None:
        if spec.per_node * spec.n_nodes > total:
            raise TooFewRows(
                f"{total} rows cannot supply {spec.n_nodes} nodes with {spec.per_node} each"
            )
        return [spec.per_node] * spec.n_nodes
    if total < spec.n_nodes:
        raise TooFewRows(f"{total} rows across {spec.n_nodes} nodes leaves empty nodes")
    base, rem = divmod(total, spec.n_nodes)
    return [base + 1 if i < rem else base for i in range(spec.n_nodes)]


def partition(dataset: Dataset, spec: PartitionSpec) -> list[Dataset]:
    """Split a dataset into per-node blocks.

    Unbiased: seeded shuffle then contiguous blocks. Biased: stable sort by
    label ascending then contiguous blocks, so node 0 receives the lowest
    labels and label means rise with the node index.
    """
    sizes = _block_sizes(dataset.n_rows, spec)
    if spec.mode == "unbiased":
        order = np.random.default_rng(spec.seed).permutation(dataset.n_rows)
    else:
        order = np.argsort(dataset.labels, kind="stable")
    out = []
    start = 0
    for size in sizes:
        out.append(dataset.take(order[start : start + size]))
        start += size
    return out


def synth_generate(
    n_nodes: int,
    per_node: int,
    d: int,
    model=("shared", None),
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> list[Dataset]:
    """Deterministic synthetic per-node datasets.

    ``model`` is ``("shared", w)`` for one common weight vector (drawn from
    the seed when ``w`` is None) or ``("per_node_shift", delta)`` where node
    i uses the shared vector shifted by i * delta along the first axis, so
    per-node minimizers are pairwise at least ``delta`` apart. Features are
    standard normal and y = x . w (+ noise).
    """
    if per_node < 1 or d < 1:
        raise NetgameError("per_node and d must be >= 1")
    kind, param = model
    rng = np.random.default_rng(seed)
    if kind == "shared":
        w = rng.standard_normal(d) if param is None else np.asarray(param, dtype=float)
        shifts = [np.zeros(d)] * n_nodes
    elif kind == "per_node_shift":
        w = rng.standard_normal(d)
        delta = float(param)
        shifts = [np.zeros(d) for _ in range(n_nodes)]
        for i in range(n_nodes):
            shifts[i][0] = i * delta
    else:
        raise NetgameError(f"unknown synthetic model {kind!r}")
    out = []
    for i in range(n_nodes):
        F = rng.standard_normal((per_node, d))
        y = F @ (w + shifts[i])
        if noise_sigma > 0:
            y = y + rng.normal(0.0, noise_sigma, size=per_node)
        out.append(
            Dataset(F, y, columns=tuple(f"x{j}" for j in range(d)), provenance=f"synth:{kind}:{i}")
        )
    return out
