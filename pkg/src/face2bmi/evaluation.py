"""Regression metrics, the stratified comparison task, and questionnaires.

The comparison task draws pairs of test records stratified three ways:
gender category (male/male, female/female, female/male), a BMI-difference
bucket i in [0, 14] defined by (0.5 + i) < |dBMI| <= (1.5 + i), and, for
mixed pairs, which gender holds the higher BMI. A machine contestant
answers a pair by predicting both BMIs; an exact tie counts as incorrect.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .errors import (
    CapacityError,
    ParseError,
    UndefinedCorrelationError,
    ValidationError,
)
from .domain import Gender
from .rng import SeededRng
from .splits import SplitPlan
from .svr import SvrModel

N_BUCKETS = 15


class GenderCategory(str, Enum):
    MALE_MALE = "male_male"
    FEMALE_FEMALE = "female_female"
    FEMALE_MALE = "female_male"


CATEGORY_ORDER = (
    GenderCategory.MALE_MALE,
    GenderCategory.FEMALE_FEMALE,
    GenderCategory.FEMALE_MALE,
)


class Truth(str, Enum):
    A_IS_HIGHER = "a"
    B_IS_HIGHER = "b"


@dataclass(frozen=True)
class ComparisonPair:
    id_a: str
    id_b: str
    gender_category: GenderCategory
    bucket: int
    truth: Truth


@dataclass
class EvalReport:
    """Metrics container; regression and pair-task sections fill separately.

    Per-gender correlations are None when a gender subset is too small or
    degenerate (marked unavailable, never reported as zero).
    """

    pearson_overall: float | None = None
    pearson_male: float | None = None
    pearson_female: float | None = None
    n_test: int | None = None
    pair_accuracy_overall: float | None = None
    n_pairs: int | None = None
    # (category value, bucket) -> [correct, total]
    pair_cells: dict[tuple[str, int], list[int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {}
        if self.pearson_overall is not None or self.n_test is not None:
            out["regression"] = {
                "pearson_overall": self.pearson_overall,
                "pearson_male": self.pearson_male,
                "pearson_female": self.pearson_female,
                "n_test": self.n_test,
            }
        if self.n_pairs is not None:
            cells = {}
            for (category, bucket), (correct, total) in sorted(self.pair_cells.items()):
                cells[f"{category}/{bucket}"] = {
                    "correct": correct,
                    "total": total,
                    "accuracy": (correct / total) if total else None,
                }
            out["pair_task"] = {
                "accuracy_overall": self.pair_accuracy_overall,
                "n_pairs": self.n_pairs,
                "cells": cells,
            }
        return out


def pearson(xs, ys) -> float:
    """Product-moment correlation of two equal-length sequences."""
    x = np.asarray(xs, dtype=np.float64).reshape(-1)
    y = np.asarray(ys, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ValidationError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 2:
        raise ValidationError("correlation needs at least 2 points")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValidationError("correlation inputs must be finite")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise UndefinedCorrelationError("zero variance; correlation undefined")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("zero variance; correlation undefined")
    return float(dx @ dy / np.sqrt(sx * sy))


def evaluate_regression(model: SvrModel, ds: Dataset, plan: SplitPlan) -> EvalReport:
    """Predict every test record and report Pearson r overall and per gender."""
    if model.normalize != ds.normalize:
        raise ValidationError(
            "model and dataset disagree on feature normalization; "
            "rebuild the dataset with the model's flag"
        )
    train_set = set(plan.train_ids)
    leaked = [sid for sid in model.support_ids if sid not in train_set]
    if leaked:
        raise ValidationError(
            f"model support contains records outside the training side: {leaked[:5]}"
        )
    test_ids = list(plan.test_ids)
    preds = model.predict_many(ds.matrix_for(test_ids))
    truths = ds.bmis_for(test_ids)
    genders = np.array([ds.record(rid).gender == Gender.MALE for rid in test_ids])

    report = EvalReport(n_test=len(test_ids))
    report.pearson_overall = pearson(preds, truths)
    for attr, mask in (("pearson_male", genders), ("pearson_female", ~genders)):
        if int(mask.sum()) < 2:
            continue
        try:
            setattr(report, attr, pearson(preds[mask], truths[mask]))
        except UndefinedCorrelationError:
            pass
    return report


def _pair_category(g_a: Gender, g_b: Gender) -> GenderCategory:
    if g_a == g_b:
        return (
            GenderCategory.MALE_MALE if g_a == Gender.MALE else GenderCategory.FEMALE_FEMALE
        )
    return GenderCategory.FEMALE_MALE


def _inverse_density_weights(midpoints: np.ndarray) -> np.ndarray:
    """Weight candidates inversely to the density of their midpoint decile.

    Flattens the sampled BMI distribution across the spectrum. Degenerate
    decile grids (ties collapsing a bin) fall back to uniform weights.
    """
    m = len(midpoints)
    if m < 20:
        return np.ones(m)
    edges = np.quantile(midpoints, np.linspace(0.0, 1.0, 11))
    widths = np.diff(edges)
    if np.any(widths <= 1e-12):
        return np.ones(m)
    bins = np.clip(np.searchsorted(edges[1:-1], midpoints, side="right"), 0, 9)
    counts = np.bincount(bins, minlength=10).astype(np.float64)
    return widths[bins] / counts[bins]


class _CandidateSet:
    """Candidate pairs of one gender category, filterable per bucket."""

    def __init__(self, ds: Dataset, ids_a: list[str], ids_b: list[str], cross: bool):
        if cross:
            pairs = [(a, b) for a in ids_a for b in ids_b]
        else:
            pairs = [
                (ids_a[i], ids_a[j])
                for i in range(len(ids_a))
                for j in range(i + 1, len(ids_a))
            ]
        keep_a, keep_b = [], []
        for a, b in pairs:
            if ds.record(a).person_id == ds.record(b).person_id:
                continue
            if b < a:
                a, b = b, a
            keep_a.append(a)
            keep_b.append(b)
        self.id_a = np.array(keep_a, dtype=object)
        self.id_b = np.array(keep_b, dtype=object)
        self.bmi_a = np.array([ds.bmi(a) for a in keep_a])
        self.bmi_b = np.array([ds.bmi(b) for b in keep_b])
        self.delta = np.abs(self.bmi_a - self.bmi_b)
        self.mid = 0.5 * (self.bmi_a + self.bmi_b)

    def bucket_indices(self, bucket: int) -> np.ndarray:
        lo, hi = 0.5 + bucket, 1.5 + bucket
        return np.flatnonzero((self.delta > lo) & (self.delta <= hi))


def _draw(
    cand: _CandidateSet,
    indices: np.ndarray,
    count: int,
    rng: SeededRng,
    used: set[tuple[str, str]],
    cell_name: str,
) -> list[int]:
    alive = [i for i in indices if (cand.id_a[i], cand.id_b[i]) not in used]
    if len(alive) < count:
        raise CapacityError(
            f"cell {cell_name}: need {count} pairs, only {len(alive)} candidates available"
        )
    weights = _inverse_density_weights(cand.mid[alive])
    chosen: list[int] = []
    alive_arr = list(alive)
    w = np.asarray(weights, dtype=np.float64)
    for _ in range(count):
        cum = np.cumsum(w)
        pick = rng.weighted_index(cum)
        idx = alive_arr.pop(pick)
        w = np.delete(w, pick)
        chosen.append(idx)
        used.add((cand.id_a[idx], cand.id_b[idx]))
    return chosen


def generate_pairs(
    ds: Dataset,
    test_ids,
    per_category: int = 300,
    seed: int = 0,
) -> list[ComparisonPair]:
    """Sample the stratified comparison task from the test pool.

    per_category pairs per gender category, split evenly over the 15
    buckets; in the mixed category each bucket holds equally many
    male-higher and female-higher pairs. No pair repeats anywhere in the
    task and the two members of a pair are always distinct persons.
    """
    if per_category < N_BUCKETS or per_category % N_BUCKETS != 0:
        raise ValidationError(
            f"per_category must be a positive multiple of {N_BUCKETS}, got {per_category}"
        )
    per_cell = per_category // N_BUCKETS
    if per_cell % 2 != 0:
        raise ValidationError(
            f"per-bucket count {per_cell} must be even to balance mixed-gender cells"
        )
    test_ids = list(test_ids)
    missing = [i for i in test_ids if i not in ds]
    if missing:
        raise ValidationError(f"test ids not in dataset: {missing[:5]}")
    males = [i for i in test_ids if ds.record(i).gender == Gender.MALE]
    females = [i for i in test_ids if ds.record(i).gender == Gender.FEMALE]

    candidates = {
        GenderCategory.MALE_MALE: _CandidateSet(ds, males, [], cross=False),
        GenderCategory.FEMALE_FEMALE: _CandidateSet(ds, females, [], cross=False),
        GenderCategory.FEMALE_MALE: _CandidateSet(ds, females, males, cross=True),
    }

    rng = SeededRng(seed)
    used: set[tuple[str, str]] = set()
    pairs: list[ComparisonPair] = []
    for category in CATEGORY_ORDER:
        cand = candidates[category]
        for bucket in range(N_BUCKETS):
            in_bucket = cand.bucket_indices(bucket)
            cell_name = f"({category.value}, bucket {bucket})"
            if category == GenderCategory.FEMALE_MALE:
                gender_a = np.array(
                    [ds.record(a).gender == Gender.MALE for a in cand.id_a[in_bucket]]
                )
                higher_a = cand.bmi_a[in_bucket] > cand.bmi_b[in_bucket]
                male_higher = in_bucket[gender_a == higher_a]
                female_higher = in_bucket[gender_a != higher_a]
                chosen = _draw(
                    cand, male_higher, per_cell // 2, rng, used,
                    cell_name + " male-higher",
                )
                chosen += _draw(
                    cand, female_higher, per_cell // 2, rng, used,
                    cell_name + " female-higher",
                )
            else:
                chosen = _draw(cand, in_bucket, per_cell, rng, used, cell_name)
            for idx in chosen:
                truth = (
                    Truth.A_IS_HIGHER
                    if cand.bmi_a[idx] > cand.bmi_b[idx]
                    else Truth.B_IS_HIGHER
                )
                pairs.append(
                    ComparisonPair(
                        id_a=cand.id_a[idx],
                        id_b=cand.id_b[idx],
                        gender_category=category,
                        bucket=bucket,
                        truth=truth,
                    )
                )
    return pairs


def answer_pairs(model, ds: Dataset, pairs: list[ComparisonPair]) -> EvalReport:
    """Machine side of the task: higher predicted BMI wins, ties are wrong."""
    ids = sorted({p.id_a for p in pairs} | {p.id_b for p in pairs})
    preds = {rid: float(model.predict(ds.vector(rid))) for rid in ids}

    report = EvalReport(n_pairs=len(pairs))
    correct_total = 0
    for pair in pairs:
        cell = report.pair_cells.setdefault((pair.gender_category.value, pair.bucket), [0, 0])
        cell[1] += 1
        pa, pb = preds[pair.id_a], preds[pair.id_b]
        if pa == pb:
            continue  # tie: counted, never correct
        answer = Truth.A_IS_HIGHER if pa > pb else Truth.B_IS_HIGHER
        if answer == pair.truth:
            cell[0] += 1
            correct_total += 1
    report.pair_accuracy_overall = (correct_total / len(pairs)) if pairs else None
    return report


def _key_path(path: Path) -> Path:
    return path.with_name(path.stem + ".key" + (path.suffix or ".csv"))


def export_questionnaire(
    pairs: list[ComparisonPair],
    ds: Dataset,
    path: str | Path,
    seed: int = 0,
) -> Path:
    """Write the blinded questionnaire CSV and its answer key.

    Left/right presentation is randomized per pair by the seeded RNG; the
    questionnaire carries only ids, the key carries the correct side plus
    the stratification metadata. Returns the key path.
    """
    path = Path(path)
    for pair in pairs:
        if pair.id_a not in ds or pair.id_b not in ds:
            raise ValidationError(f"pair references unknown record: {pair.id_a}, {pair.id_b}")
    rng = SeededRng(seed)
    key_path = _key_path(path)
    with open(path, "w", newline="", encoding="utf-8") as qf, open(
        key_path, "w", newline="", encoding="utf-8"
    ) as kf:
        qw = csv.writer(qf, lineterminator="\n")
        kw = csv.writer(kf, lineterminator="\n")
        qw.writerow(["pair_id", "image_a", "image_b"])
        kw.writerow(
            ["pair_id", "left_id", "right_id", "higher_side", "gender_category", "bucket"]
        )
        for i, pair in enumerate(pairs):
            pair_id = f"pair_{i:05d}"
            swapped = rng.coin()
            left, right = (pair.id_b, pair.id_a) if swapped else (pair.id_a, pair.id_b)
            a_higher = pair.truth == Truth.A_IS_HIGHER
            higher_side = "right" if (swapped == a_higher) else "left"
            qw.writerow([pair_id, left, right])
            kw.writerow(
                [pair_id, left, right, higher_side, pair.gender_category.value, str(pair.bucket)]
            )
    return key_path


def score_human_answers(key_path: str | Path, answers_path: str | Path) -> EvalReport:
    """Overlay: accuracy of completed questionnaire answers against the key.

    The answers CSV needs columns pair_id,answer with answer in
    {left, right}; repeated pair_ids (multiple raters) are all scored
    individually. Human answers are never simulated.
    """
    key: dict[str, tuple[str, str, int]] = {}
    with open(key_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            key[row["pair_id"]] = (
                row["higher_side"],
                row["gender_category"],
                int(row["bucket"]),
            )
    report = EvalReport(n_pairs=0)
    correct_total = 0
    with open(answers_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"pair_id", "answer"} <= set(reader.fieldnames):
            raise ParseError(f"{answers_path}: expected columns pair_id,answer")
        for lineno, row in enumerate(reader, start=2):
            pair_id, answer = row["pair_id"], row["answer"].strip()
            if pair_id not in key:
                raise ParseError(f"{answers_path}: line {lineno}: unknown pair_id {pair_id!r}")
            if answer not in ("left", "right"):
                raise ParseError(
                    f"{answers_path}: line {lineno}: answer must be left/right, got {answer!r}"
                )
            higher_side, category, bucket = key[pair_id]
            cell = report.pair_cells.setdefault((category, bucket), [0, 0])
            cell[1] += 1
            report.n_pairs += 1
            if answer == higher_side:
                cell[0] += 1
                correct_total += 1
    report.pair_accuracy_overall = (
        correct_total / report.n_pairs if report.n_pairs else None
    )
    return report
