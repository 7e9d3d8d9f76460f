"""Per-iteration run records shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class TraceRecord:
    iteration: int
    layer: str
    phi: Optional[float] = None
    welfare: Optional[float] = None
    max_step: Optional[float] = None
    residual: Optional[float] = None
    dist_ref: Optional[float] = None
    costs: Optional[np.ndarray] = None


@dataclass
class RunTrace:
    """Append-only sequence of :class:`TraceRecord` with a convergence flag."""

    records: list = field(default_factory=list)
    converged: bool = True
    note: str = ""
    tail_average: Optional[np.ndarray] = None

    def append(self, record: TraceRecord) -> None:
        if self.records and record.iteration < self.records[-1].iteration:
            raise ValueError("iteration indices must be nondecreasing")
        self.records.append(record)

    def phi_series(self, layer: Optional[str] = None) -> np.ndarray:
        vals = [
            r.phi
            for r in self.records
            if r.phi is not None and (layer is None or r.layer == layer)
        ]
        return np.array(vals)

    def last(self) -> TraceRecord:
        return self.records[-1]

    def to_rows(self):
        """Records as dictionaries with stable keys, costs expanded per player."""
        rows = []
        for r in self.records:
            row = {
                "iteration": r.iteration,
                "layer": r.layer,
                "phi": r.phi,
                "welfare": r.welfare,
                "max_step": r.max_step,
                "residual": r.residual,
                "dist_ref": r.dist_ref,
            }
            if r.costs is not None:
                for i, c in enumerate(r.costs):
                    row[f"cost_{i}"] = float(c)
            rows.append(row)
        return rows
