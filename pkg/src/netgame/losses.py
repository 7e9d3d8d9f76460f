"""Local learning costs.

The quadratic (mean-squared-error) loss is the workhorse: it is stored via
sufficient statistics so solvers can use closed forms. A logistic loss is
provided as a second smooth convex instance behind the same interface.

Sign convention: expanding sum_k (y_k - x_k^T u)^2 gives the linear
coefficient -2 sum_k x_k y_k, so we store Y = -2 sum x y. With that choice
``value(u, exact=True)`` is exactly the mean squared error and the
closed-form best response minimizes true squared error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import DimensionMismatch, EmptyData


@dataclass(frozen=True, eq=False)
class QuadraticLoss:
    """Mean-squared-error loss held as sufficient statistics.

    X = sum_k x_k x_k^T, Y = -2 sum_k x_k y_k, K = sample count,
    y_sq = sum_k y_k^2. The raw feature matrix is kept when available so the
    low-rank (Woodbury) best-response path can be used for d >= K.
    """

    X: np.ndarray
    Y: np.ndarray
    K: int
    y_sq: float = 0.0
    features: Optional[np.ndarray] = None

    kind = "quadratic"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.ndim != 2 or X.shape[0] != X.shape[1]:
            raise DimensionMismatch(f"X must be square, got {X.shape}")
        if Y.shape != (X.shape[0],):
            raise DimensionMismatch(f"Y must have shape ({X.shape[0]},), got {Y.shape}")
        if self.K < 1:
            raise EmptyData("sample count must be >= 1")
        if np.max(np.abs(X - X.T)) > 1e-9:
            raise DimensionMismatch("X must be symmetric")
        if np.linalg.eigvalsh(X)[0] < -1e-9:
            raise DimensionMismatch("X must be positive semidefinite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    def value(self, u: np.ndarray, exact: bool = False) -> float:
        """(u^T X u + Y^T u) / K, plus y_sq / K when exact (true MSE)."""
        u = self._check(u)
        val = (u @ self.X @ u + self.Y @ u) / self.K
        if exact:
            val += self.y_sq / self.K
        return float(val)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        u = self._check(u)
        return (2.0 * self.X @ u + self.Y) / self.K

    def grad_lipschitz(self) -> float:
        return float(2.0 * np.linalg.eigvalsh(self.X)[-1] / self.K)

    def _check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape != (self.dim,):
            raise DimensionMismatch(f"expected dimension {self.dim}, got {u.shape}")
        return u


def quadratic_from_data(points: Sequence[tuple]) -> QuadraticLoss:
    """Build a :class:`QuadraticLoss` from (feature vector, label) pairs."""
    points = list(points)
    if not points:
        raise EmptyData("need at least one data point")
    xs = [np.atleast_1d(np.asarray(x, dtype=float)) for x, _ in points]
    ys = np.asarray([float(y) for _, y in points])
    d = xs[0].shape[0]
    for x in xs:
        if x.shape != (d,):
            raise DimensionMismatch("inconsistent feature dimensions")
    F = np.stack(xs)
    return QuadraticLoss(
        X=F.T @ F,
        Y=-2.0 * F.T @ ys,
        K=len(points),
        y_sq=float(ys @ ys),
        features=F,
    )


def quadratic_from_arrays(features: np.ndarray, labels: np.ndarray) -> QuadraticLoss:
    """Same as :func:`quadratic_from_data` for already-stacked arrays."""
    F = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float).reshape(-1)
    if F.ndim != 2 or F.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"features {F.shape} and labels {y.shape} do not align")
    if F.shape[0] == 0:
        raise EmptyData("need at least one data point")
    return QuadraticLoss(X=F.T @ F, Y=-2.0 * F.T @ y, K=F.shape[0], y_sq=float(y @ y), features=F)


@dataclass(frozen=True, eq=False)
class LogisticLoss:
    """Mean logistic loss over labelled points with labels in {-1, +1}."""

    features: np.ndarray
    labels: np.ndarray

    kind = "logistic"

    def __post_init__(self):
        F = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float).reshape(-1)
        if F.ndim != 2 or F.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"features {F.shape} and labels {y.shape} do not align")
        if F.shape[0] == 0:
            raise EmptyData("need at least one data point")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise DimensionMismatch("logistic labels must be -1 or +1")
        object.__setattr__(self, "features", F)
        object.__setattr__(self, "labels", y)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def K(self) -> int:
        return self.features.shape[0]

    def value(self, u: np.ndarray, exact: bool = False) -> float:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape != (self.dim,):
            raise DimensionMismatch(f"expected dimension {self.dim}, got {u.shape}")
        z = -self.labels * (self.features @ u)
        # log(1 + exp(z)) computed stably for large |z|
        return float(np.mean(np.logaddexp(0.0, z)))

    def gradient(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape != (self.dim,):
            raise DimensionMismatch(f"expected dimension {self.dim}, got {u.shape}")
        z = -self.labels * (self.features @ u)
        sig = 1.0 / (1.0 + np.exp(-z))
        return -(self.features * (self.labels * sig)[:, None]).mean(axis=0)

    def grad_lipschitz(self) -> float:
        return float(np.linalg.norm(self.features, 2) ** 2 / (4.0 * self.K))


def loss_value(loss, u: np.ndarray, exact: bool = False) -> float:
    return loss.value(u, exact=exact)


def loss_gradient(loss, u: np.ndarray) -> np.ndarray:
    return loss.gradient(u)
