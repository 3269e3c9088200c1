"""Synthetic paired datasets and stub predictors shared across tests."""

from __future__ import annotations

import numpy as np

from face2bmi.dataset import build_dataset
from face2bmi.domain import FaceRecord, Gender, Role

RACE_LABELS = ("white", "african_american")


def make_paired_records(
    n_persons: int = 200,
    dim: int = 16,
    seed: int = 0,
    noise: float = 0.5,
    sibling_jitter: float = 0.1,
    signal: float = 20.0,
    base: float = 28.0,
    with_race: bool = True,
):
    """Complete before/after persons whose BMI is linear in the stored feature.

    Embeddings are unit-norm float32; the BMI is computed from the exact
    float64 renormalization the dataset builder will produce, so the
    linear relation survives storage. Siblings share a person latent and
    differ by `sibling_jitter`.
    """
    rng = np.random.default_rng(seed)
    w = rng.normal(size=dim)
    w *= signal / np.linalg.norm(w)
    records, embeddings = [], {}
    for p in range(n_persons):
        person_id = f"p{p:04d}"
        gender = Gender.MALE if p % 2 == 0 else Gender.FEMALE
        race = RACE_LABELS[(p // 2) % 2] if with_race else None
        latent = rng.normal(size=dim)
        for role, tag in ((Role.BEFORE, "b"), (Role.AFTER, "a")):
            e = latent + sibling_jitter * rng.normal(size=dim)
            e32 = (e / np.linalg.norm(e)).astype(np.float32)
            feat = e32.astype(np.float64)
            feat /= np.linalg.norm(feat)
            bmi = float(np.clip(base + feat @ w + noise * rng.normal(), 7.1, 130.0))
            height = 1.7
            weight = bmi * height * height
            record_id = f"{person_id}_{tag}"
            records.append(
                FaceRecord.from_measurements(
                    record_id, person_id, role, gender, height, weight, race=race
                )
            )
            embeddings[record_id] = e32
    return records, embeddings


def make_dataset(n_persons: int = 200, dim: int = 16, seed: int = 0, **kwargs):
    records, embeddings = make_paired_records(n_persons, dim, seed, **kwargs)
    ds, report = build_dataset(records, embeddings, normalize=True)
    assert report.clean
    return ds


class LookupModel:
    """Stub predictor keyed on the exact feature bytes (deterministic)."""

    def __init__(self, ds, predictions_by_id: dict[str, float]):
        self.dim = ds.dim
        self.normalize = ds.normalize
        self._table = {
            ds.vector(rid).tobytes(): float(value)
            for rid, value in predictions_by_id.items()
        }

    def predict(self, x) -> float:
        return self._table[np.asarray(x, dtype=np.float64).tobytes()]


def oracle_model(ds) -> LookupModel:
    """Predicts every record's true BMI."""
    return LookupModel(ds, {rid: ds.bmi(rid) for rid in ds.ids()})


class ConstantModel:
    """Predicts one constant everywhere."""

    def __init__(self, value: float, dim: int = 0):
        self.value = float(value)
        self.dim = dim
        self.normalize = True

    def predict(self, x) -> float:
        return self.value
