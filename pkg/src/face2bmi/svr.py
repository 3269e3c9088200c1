"""Epsilon support vector regression: training, prediction, serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import solver
from .dataset import Dataset
from .errors import ConvergenceError, FormatError, ValidationError
from .kernels import KernelKind, KernelSpec, gram, kernel_cache

MODEL_FORMAT_VERSION = 1

# Support coefficients must sum to zero within this multiple of c.
_COEFF_SUM_TOL = 1e-6


@dataclass(frozen=True)
class SvrHyperParams:
    """Box constraint, tube half-width (in BMI units), and stopping rule.

    max_passes is the iteration budget in sweeps of n working-pair updates;
    None resolves to 10 * n sweeps at training time.
    """

    c: float = 1.0
    epsilon: float = 1.0
    tolerance: float = 1e-3
    max_passes: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValidationError(f"c must be positive and finite, got {self.c!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValidationError(f"epsilon must be nonnegative, got {self.epsilon!r}")
        if not 0 < self.tolerance <= 1e-1:
            raise ValidationError(
                f"tolerance must be in (0, 0.1], got {self.tolerance!r}"
            )
        if self.max_passes is not None and self.max_passes < 1:
            raise ValidationError(f"max_passes must be positive, got {self.max_passes!r}")


@dataclass
class SvrModel:
    """Trained regressor: kernel, support expansion, and the bias term.

    support_vectors live in training space, i.e. unit-normalized when
    `normalize` is set; predict() expects its input in the same space.
    """

    kernel: KernelSpec
    params: SvrHyperParams
    normalize: bool
    dim: int
    support_ids: list[str]
    support_vectors: np.ndarray
    coeffs: np.ndarray
    bias: float

    def predict(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.dim:
            raise ValidationError(
                f"input dim {x.shape[0]} does not match model dim {self.dim}"
            )
        if len(self.coeffs) == 0:
            return self.bias
        k = gram(self.kernel, self.support_vectors, x[None, :])[:, 0]
        return float(self.coeffs @ k + self.bias)

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ValidationError(
                f"input dim {X.shape[1]} does not match model dim {self.dim}"
            )
        if len(self.coeffs) == 0:
            return np.full(X.shape[0], self.bias, dtype=np.float64)
        return gram(self.kernel, X, self.support_vectors) @ self.coeffs + self.bias


def train(
    ds: Dataset,
    ids: Iterable[str],
    kernel: KernelSpec = KernelSpec(),
    params: SvrHyperParams = SvrHyperParams(),
    seed: int = 0,
    backend: str | None = None,
) -> SvrModel:
    """Fit an epsilon-SVR on the given training records.

    The solve is deterministic given the dataset, id order, hyperparameters
    and seed (the SMO path itself is seed-free; the seed is accepted for
    interface symmetry with the sampling operations). Unordered id
    collections are sorted first so results cannot depend on hash order.
    """
    id_list = list(ids)
    if isinstance(ids, (set, frozenset)):
        id_list = sorted(id_list)
    if len(id_list) < 2:
        raise ValidationError(f"training needs at least 2 records, got {len(id_list)}")
    if len(set(id_list)) != len(id_list):
        raise ValidationError("duplicate ids in training set")
    missing = [i for i in id_list if i not in ds]
    if missing:
        raise ValidationError(f"training ids not in dataset: {missing[:5]}")

    X = ds.matrix_for(id_list)
    y = ds.bmis_for(id_list)
    n = len(id_list)
    spec = kernel.resolved(ds.dim)
    passes = params.max_passes if params.max_passes is not None else 10 * n
    max_iter = passes * n

    cache = kernel_cache(spec, X)
    result = solver.solve(
        cache, y, params.c, params.epsilon, params.tolerance, max_iter, backend=backend
    )
    if not result.converged:
        raise ConvergenceError(
            f"SMO did not reach tolerance {params.tolerance} within "
            f"{max_iter} iterations (max KKT violation {result.kkt_gap:.3e})",
            kkt_violation=result.kkt_gap,
        )

    beta = result.beta
    coeff_sum = float(beta.sum())
    if abs(coeff_sum) > _COEFF_SUM_TOL * params.c + 1e-12:
        raise ConvergenceError(
            f"dual equality constraint violated: sum of coefficients {coeff_sum:.3e}",
            kkt_violation=abs(coeff_sum),
        )
    mask = beta != 0.0
    return SvrModel(
        kernel=spec,
        params=params,
        normalize=ds.normalize,
        dim=ds.dim,
        support_ids=[id_list[i] for i in np.flatnonzero(mask)],
        support_vectors=X[mask].copy(),
        coeffs=beta[mask].copy(),
        bias=result.bias,
    )


def predict(model: SvrModel, x: np.ndarray) -> float:
    """Kernel expansion at a single point, in model (training) space."""
    return model.predict(x)


def save_model(model: SvrModel, path: str | Path) -> None:
    payload = {
        "version": MODEL_FORMAT_VERSION,
        "kernel": {
            "kind": model.kernel.kind.value,
            "gamma": model.kernel.gamma,
        },
        "params": {
            "c": model.params.c,
            "epsilon": model.params.epsilon,
            "tolerance": model.params.tolerance,
        },
        "normalize": model.normalize,
        "bias": model.bias,
        "dim": model.dim,
        "support": [
            {
                "id": sid,
                "coeff": float(coeff),
                "vec": [float(v) for v in vec],
            }
            for sid, coeff, vec in zip(
                model.support_ids, model.coeffs, model.support_vectors
            )
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path: str | Path) -> SvrModel:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(payload, dict) or "version" not in payload:
        raise FormatError(f"{path}: missing model version")
    if payload["version"] != MODEL_FORMAT_VERSION:
        raise FormatError(
            f"{path}: unsupported model version {payload['version']!r}"
        )
    try:
        kernel = KernelSpec(
            kind=KernelKind(payload["kernel"]["kind"]),
            gamma=payload["kernel"]["gamma"],
        )
        params = SvrHyperParams(
            c=payload["params"]["c"],
            epsilon=payload["params"]["epsilon"],
            tolerance=payload["params"]["tolerance"],
        )
        support = payload["support"]
        dim = int(payload["dim"])
        vectors = np.array([entry["vec"] for entry in support], dtype=np.float64)
        if len(support) == 0:
            vectors = np.zeros((0, dim), dtype=np.float64)
        model = SvrModel(
            kernel=kernel,
            params=params,
            normalize=bool(payload["normalize"]),
            dim=dim,
            support_ids=[entry["id"] for entry in support],
            support_vectors=vectors,
            coeffs=np.array([entry["coeff"] for entry in support], dtype=np.float64),
            bias=float(payload["bias"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed model file: {exc}") from None
    if model.support_vectors.size and model.support_vectors.shape[1] != model.dim:
        raise FormatError(f"{path}: support vector dim does not match model dim")
    return model
