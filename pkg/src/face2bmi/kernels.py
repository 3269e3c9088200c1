"""Kernel functions and cached Gram rows for the dual solver."""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ValidationError

# Full Gram matrix is materialized up to this many training points; above
# it, rows are computed on demand behind an LRU cache.
DENSE_LIMIT = 8192


class KernelKind(str, Enum):
    LINEAR = "linear"
    RBF = "rbf"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameter.

    gamma may stay None for RBF until training resolves it to 1/dim; a
    trained model always carries the resolved value.
    """

    kind: KernelKind = KernelKind.LINEAR
    gamma: float | None = None

    def __post_init__(self):
        if self.kind == KernelKind.LINEAR and self.gamma is not None:
            raise ValidationError("gamma is only meaningful for the rbf kernel")
        if self.gamma is not None and not (
            math.isfinite(self.gamma) and self.gamma > 0
        ):
            raise ValidationError(f"gamma must be positive and finite, got {self.gamma!r}")

    def resolved(self, dim: int) -> "KernelSpec":
        if self.kind == KernelKind.RBF and self.gamma is None:
            return replace(self, gamma=1.0 / dim)
        return self


def kernel_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ValidationError(f"kernel dim mismatch: {x.shape[0]} vs {y.shape[0]}")
    if spec.kind == KernelKind.LINEAR:
        return float(np.dot(x, y))
    if spec.gamma is None:
        raise ValidationError("rbf kernel requires a resolved gamma")
    d = x - y
    return float(np.exp(-spec.gamma * np.dot(d, d)))


def gram(spec: KernelSpec, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """Gram matrix K[i, j] = k(X[i], Y[j]); Y defaults to X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise ValidationError(f"kernel dim mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.kind == KernelKind.LINEAR:
        return X @ Y.T
    if spec.gamma is None:
        raise ValidationError("rbf kernel requires a resolved gamma")
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(Y * Y, axis=1)[None, :]
        - 2.0 * (X @ Y.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.gamma * sq)


class DenseKernel:
    """Precomputed full Gram matrix; row() returns views."""

    def __init__(self, spec: KernelSpec, X: np.ndarray):
        self.matrix = np.ascontiguousarray(gram(spec, X))
        self.diag = np.ascontiguousarray(np.diagonal(self.matrix)).copy()

    def row(self, i: int) -> np.ndarray:
        return self.matrix[i]


class LruRowKernel:
    """Rows computed on demand, keeping at most max_rows of them."""

    def __init__(self, spec: KernelSpec, X: np.ndarray, max_rows: int = 256):
        self._spec = spec
        self._X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self._max_rows = max(2, max_rows)
        if spec.kind == KernelKind.LINEAR:
            self.diag = np.sum(self._X * self._X, axis=1)
        else:
            self.diag = np.ones(self._X.shape[0], dtype=np.float64)
        self.matrix = None

    def row(self, i: int) -> np.ndarray:
        cached = self._rows.get(i)
        if cached is not None:
            self._rows.move_to_end(i)
            return cached
        row = gram(self._spec, self._X[i : i + 1], self._X)[0]
        self._rows[i] = row
        if len(self._rows) > self._max_rows:
            self._rows.popitem(last=False)
        return row


def kernel_cache(
    spec: KernelSpec,
    X: np.ndarray,
    dense_limit: int = DENSE_LIMIT,
    max_cached_rows: int = 256,
):
    """Pick the Gram storage strategy for a training set of this size."""
    if X.shape[0] <= dense_limit:
        return DenseKernel(spec, X)
    return LruRowKernel(spec, X, max_rows=max_cached_rows)
