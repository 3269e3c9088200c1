"""Matched-pair bias audit with an exact binomial significance test.

Pairs two demographic groups at nearly equal true BMI (difference below
1.0), balanced so each group holds the slightly-higher member equally
often. An unbiased predictor should then favor either group about half
the time; the observed counts are tested against 50-50 with an exact
binomial tail computed in log space (no normal approximation).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln, logsumexp

from .dataset import Dataset
from .domain import Gender
from .errors import CapacityError, ValidationError
from .rng import SeededRng

# Audit pairs must have a true-BMI gap strictly below this.
MAX_AUDIT_BMI_GAP = 1.0


class GroupAttr(str, Enum):
    GENDER = "gender"
    RACE = "race"


class TrueHigher(str, Enum):
    A = "a"
    B = "b"


@dataclass(frozen=True)
class AuditPair:
    id_a: str
    id_b: str
    group_a: str
    group_b: str
    true_higher: TrueHigher


@dataclass
class AuditReport:
    groups: tuple[str, str]
    n_pairs: int
    higher_count_per_group: dict[str, int]
    p_one_sided: float
    p_two_sided: float
    pool: str
    seed: int
    prediction_ties: int

    def to_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "n": self.n_pairs,
            "counts": dict(sorted(self.higher_count_per_group.items())),
            "p_one_sided": self.p_one_sided,
            "p_two_sided": self.p_two_sided,
            "pool": self.pool,
            "seed": self.seed,
            "prediction_ties": self.prediction_ties,
        }

    def summary(self) -> str:
        ga, gb = self.groups
        ca = self.higher_count_per_group[ga]
        cb = self.higher_count_per_group[gb]
        return (
            f"{self.n_pairs} pairs ({ga} vs {gb}): higher BMI predicted for "
            f"{ga} in {ca}, {gb} in {cb} "
            f"(one-sided p={self.p_one_sided:.4f}, two-sided p={self.p_two_sided:.4f})"
        )


def binomial_test(k: int, n: int, p0: float) -> tuple[float, float]:
    """Exact binomial tail probabilities for k successes out of n.

    Returns (one_sided, two_sided): one_sided is P(X >= k) under
    Binomial(n, p0); two_sided is min(1, 2 * min(P(X <= k), P(X >= k))).
    Tails are summed in log space via the log-gamma function.
    """
    if not isinstance(k, (int, np.integer)) or not isinstance(n, (int, np.integer)):
        raise ValidationError("k and n must be integers")
    if n < 1 or not 0 <= k <= n:
        raise ValidationError(f"need 0 <= k <= n with n >= 1, got k={k}, n={n}")
    if not 0.0 < p0 < 1.0:
        raise ValidationError(f"p0 must be in (0, 1), got {p0}")

    i = np.arange(0, n + 1)
    log_pmf = (
        gammaln(n + 1)
        - gammaln(i + 1)
        - gammaln(n - i + 1)
        + i * math.log(p0)
        + (n - i) * math.log1p(-p0)
    )
    p_ge = float(np.exp(logsumexp(log_pmf[k:])))
    p_le = float(np.exp(logsumexp(log_pmf[: k + 1])))
    p_ge = min(p_ge, 1.0)
    p_le = min(p_le, 1.0)
    return p_ge, min(1.0, 2.0 * min(p_le, p_ge))


def _group_label(record, attr: GroupAttr) -> str | None:
    if attr == GroupAttr.GENDER:
        return record.gender.value
    return record.race


def build_audit_pairs(
    ds: Dataset,
    pool_ids,
    group_attr: GroupAttr,
    group_x: str,
    group_y: str,
    n_pairs: int,
    seed: int = 0,
) -> list[AuditPair]:
    """Sample n_pairs matched cross-group pairs, balanced by true-higher side.

    Exactly n_pairs/2 pairs have the group_x member slightly higher and
    n_pairs/2 the group_y member; true-BMI ties are never eligible. Raises
    CapacityError with the achievable maximum when the pool is too thin.
    """
    if n_pairs < 2 or n_pairs % 2 != 0:
        raise ValidationError(f"n_pairs must be a positive even number, got {n_pairs}")
    if group_x == group_y:
        raise ValidationError("audit groups must differ")
    pool_ids = list(pool_ids)
    missing = [i for i in pool_ids if i not in ds]
    if missing:
        raise ValidationError(f"pool ids not in dataset: {missing[:5]}")
    if group_attr == GroupAttr.GENDER:
        valid = {g.value for g in Gender}
        for g in (group_x, group_y):
            if g not in valid:
                raise ValidationError(f"gender group must be one of {sorted(valid)}, got {g!r}")

    xs = [i for i in pool_ids if _group_label(ds.record(i), group_attr) == group_x]
    ys = [i for i in pool_ids if _group_label(ds.record(i), group_attr) == group_y]
    if not xs or not ys:
        raise CapacityError(
            f"pool has {len(xs)} member(s) of {group_x!r} and {len(ys)} of {group_y!r}"
        )

    bmi_x = np.array([ds.bmi(i) for i in xs])
    bmi_y = np.array([ds.bmi(i) for i in ys])
    diff = bmi_x[:, None] - bmi_y[None, :]
    close = np.abs(diff) < MAX_AUDIT_BMI_GAP
    x_higher = np.argwhere(close & (diff > 0.0))
    y_higher = np.argwhere(close & (diff < 0.0))

    need = n_pairs // 2
    achievable = 2 * min(len(x_higher), len(y_higher))
    if len(x_higher) < need or len(y_higher) < need:
        raise CapacityError(
            f"cannot build {n_pairs} balanced pairs: {len(x_higher)} {group_x}-higher and "
            f"{len(y_higher)} {group_y}-higher candidates (achievable maximum {achievable})"
        )

    rng = SeededRng(seed)
    pairs: list[AuditPair] = []
    for rows, higher in ((x_higher, TrueHigher.A), (y_higher, TrueHigher.B)):
        for xi, yi in rows[rng.sample_indices(len(rows), need)]:
            pairs.append(
                AuditPair(
                    id_a=xs[xi],
                    id_b=ys[yi],
                    group_a=group_x,
                    group_b=group_y,
                    true_higher=higher,
                )
            )
    # Shuffle so tie alternation in run_audit cannot align with a group.
    rng.shuffle(pairs)
    return pairs


def run_audit(
    model,
    ds: Dataset,
    pairs: list[AuditPair],
    pool: str = "test",
    seed: int = 0,
) -> AuditReport:
    """Tally which group gets the higher predicted BMI and test against 50-50.

    Exact prediction ties are split alternately toward A then B in pair
    order (deterministic, asymptotically even); the tie count is reported.
    One-sided p is the upper tail at the dominant group's count, so it is
    invariant under swapping the group labels.
    """
    if not pairs:
        raise ValidationError("audit needs at least one pair")
    groups = (pairs[0].group_a, pairs[0].group_b)
    for p in pairs:
        if (p.group_a, p.group_b) != groups:
            raise ValidationError("audit pairs mix different group pairings")

    ids = sorted({p.id_a for p in pairs} | {p.id_b for p in pairs})
    preds = {rid: float(model.predict(ds.vector(rid))) for rid in ids}

    counts = {groups[0]: 0, groups[1]: 0}
    ties = 0
    for pair in pairs:
        pa, pb = preds[pair.id_a], preds[pair.id_b]
        if pa > pb:
            winner = pair.group_a
        elif pb > pa:
            winner = pair.group_b
        else:
            winner = pair.group_a if ties % 2 == 0 else pair.group_b
            ties += 1
        counts[winner] += 1

    n = len(pairs)
    k_dominant = max(counts.values())
    p_one, p_two = binomial_test(k_dominant, n, 0.5)
    return AuditReport(
        groups=groups,
        n_pairs=n,
        higher_count_per_group=counts,
        p_one_sided=p_one,
        p_two_sided=p_two,
        pool=pool,
        seed=seed,
        prediction_ties=ties,
    )


def save_audit_report(report: AuditReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
