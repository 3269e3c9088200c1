"""Core domain types: face records, BMI arithmetic, weight categories."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

# Plausibility windows enforced when records are ingested.
HEIGHT_RANGE_M = (0.5, 2.8)
WEIGHT_RANGE_KG = (20.0, 400.0)

# categorize() rejects values at or below this sanity floor.
MIN_CATEGORIZABLE_BMI = 10.0


class Role(str, Enum):
    BEFORE = "before"
    AFTER = "after"


class Gender(str, Enum):
    MALE = "M"
    FEMALE = "F"


class BmiCategory(str, Enum):
    UNDERWEIGHT = "underweight"
    NORMAL = "normal"
    OVERWEIGHT = "overweight"
    MODERATELY_OBESE = "moderately_obese"
    SEVERELY_OBESE = "severely_obese"
    VERY_SEVERELY_OBESE = "very_severely_obese"


# Upper bin edges; every interval is open below and closed above, so an
# exact edge value belongs to the lower-named category.
_BIN_UPPER_EDGES = (
    (18.5, BmiCategory.UNDERWEIGHT),
    (25.0, BmiCategory.NORMAL),
    (30.0, BmiCategory.OVERWEIGHT),
    (35.0, BmiCategory.MODERATELY_OBESE),
    (40.0, BmiCategory.SEVERELY_OBESE),
)


def _require_positive_finite(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


def compute_bmi(weight_kg: float, height_m: float) -> float:
    """Body mass index: mass in kilograms over squared height in meters."""
    _require_positive_finite("weight_kg", weight_kg)
    _require_positive_finite("height_m", height_m)
    return weight_kg / (height_m * height_m)


def categorize(bmi: float) -> BmiCategory:
    """Map a BMI value to its weight category.

    Values in (10, 16] land in UNDERWEIGHT even though the conventional
    underweight bin starts at 16: model predictions can fall below any
    real subject's BMI and must still be categorizable.
    """
    if not (isinstance(bmi, (int, float)) and math.isfinite(bmi)):
        raise DomainError(f"bmi must be finite, got {bmi!r}")
    if bmi <= MIN_CATEGORIZABLE_BMI:
        raise DomainError(
            f"bmi must exceed the sanity floor {MIN_CATEGORIZABLE_BMI}, got {bmi}"
        )
    for upper, category in _BIN_UPPER_EDGES:
        if bmi <= upper:
            return category
    return BmiCategory.VERY_SEVERELY_OBESE


@dataclass(frozen=True)
class FaceRecord:
    """One face image: subject identity, pair linkage, body measurements.

    Constructing a record validates the measurement ranges and the stored
    BMI, so any FaceRecord in existence satisfies the dataset invariants.
    """

    record_id: str
    person_id: str
    role: Role
    gender: Gender
    height_m: float
    weight_kg: float
    bmi: float
    race: str | None = None

    def __post_init__(self):
        lo, hi = HEIGHT_RANGE_M
        if not lo < self.height_m < hi:
            raise DomainError(
                f"height_m {self.height_m!r} outside plausible range ({lo}, {hi})"
            )
        lo, hi = WEIGHT_RANGE_KG
        if not lo < self.weight_kg < hi:
            raise DomainError(
                f"weight_kg {self.weight_kg!r} outside plausible range ({lo}, {hi})"
            )
        expected = compute_bmi(self.weight_kg, self.height_m)
        if not math.isclose(self.bmi, expected, rel_tol=1e-9):
            raise DomainError(
                f"bmi {self.bmi!r} inconsistent with weight/height (expected {expected!r})"
            )

    @classmethod
    def from_measurements(
        cls,
        record_id: str,
        person_id: str,
        role: Role,
        gender: Gender,
        height_m: float,
        weight_kg: float,
        race: str | None = None,
    ) -> "FaceRecord":
        """Build a record with the BMI derived from the measurements."""
        return cls(
            record_id=record_id,
            person_id=person_id,
            role=role,
            gender=gender,
            height_m=height_m,
            weight_kg=weight_kg,
            bmi=compute_bmi(weight_kg, height_m),
            race=race,
        )

    @property
    def category(self) -> BmiCategory:
        return categorize(self.bmi)
