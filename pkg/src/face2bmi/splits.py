"""Train/test split protocols: person-disjoint and person-overlapping."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .dataset import Dataset
from .domain import Role
from .errors import FormatError, ParseError, ValidationError
from .rng import SeededRng


class Protocol(str, Enum):
    ACROSS_PEOPLE = "across-people"
    WITHIN_PERSON = "within-person"


@dataclass(frozen=True)
class SplitPlan:
    protocol: Protocol
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    seed: int

    def validate(self, ds: Dataset) -> None:
        """Check the partition invariants against a dataset; raises on violation."""
        train, test = set(self.train_ids), set(self.test_ids)
        if train & test:
            raise ValidationError("train and test overlap")
        if train | test != set(ds.ids()):
            raise ValidationError("split does not cover the dataset exactly")
        person = {r.record_id: r.person_id for r in ds.records}
        train_persons = {person[i] for i in self.train_ids}
        test_persons = {person[i] for i in self.test_ids}
        if self.protocol == Protocol.ACROSS_PEOPLE:
            if train_persons & test_persons:
                raise ValidationError("across-people split shares persons across sides")
        else:
            if not test_persons <= train_persons:
                raise ValidationError("within-person test record lacks a train sibling")
            if len(test_persons) != len(self.test_ids):
                raise ValidationError("within-person split put both siblings in test")


def split_across_people(
    ds: Dataset,
    test_fraction: float | None = None,
    seed: int = 0,
    n_test: int | None = None,
) -> SplitPlan:
    """Person-disjoint partition.

    Whole persons are moved to the test side, in seeded-shuffle order, until
    the test record count reaches the quota: round(test_fraction * total) or
    the explicit n_test record count. Person atomicity may overshoot the
    quota by one person's records.
    """
    if len(ds) == 0:
        raise ValidationError("cannot split an empty dataset")
    if (test_fraction is None) == (n_test is None):
        raise ValidationError("specify exactly one of test_fraction or n_test")
    total = len(ds)
    if test_fraction is not None:
        if not 0.0 < test_fraction < 1.0:
            raise ValidationError(f"test_fraction must be in (0, 1), got {test_fraction}")
        quota = round(test_fraction * total)
    else:
        quota = n_test
    if quota < 1:
        raise ValidationError("requested test side is empty")
    if quota >= total:
        raise ValidationError("requested test side leaves no training records")

    persons = ds.persons()
    order = sorted(persons)
    rng = SeededRng(seed)
    rng.shuffle(order)

    test_ids: list[str] = []
    test_persons: set[str] = set()
    for person in order:
        if len(test_ids) >= quota:
            break
        test_persons.add(person)
        test_ids.extend(r.record_id for r in persons[person])
    if len(test_ids) >= total:
        raise ValidationError("quota consumed every person; no training side left")
    train_ids = [r.record_id for r in ds.records if r.person_id not in test_persons]
    return SplitPlan(Protocol.ACROSS_PEOPLE, tuple(train_ids), tuple(test_ids), seed)


def split_within_person(ds: Dataset, n_test: int, seed: int = 0) -> SplitPlan:
    """Person-overlapping partition.

    n_test persons are sampled; a coin flip sends one of each person's two
    records to test, leaving the sibling in training.
    """
    persons = ds.persons()
    if n_test < 1:
        raise ValidationError(f"n_test must be positive, got {n_test}")
    if n_test > len(persons):
        raise ValidationError(
            f"n_test {n_test} exceeds the {len(persons)} complete persons available"
        )
    rng = SeededRng(seed)
    chosen = rng.sample(sorted(persons), n_test)
    test_ids: list[str] = []
    for person in chosen:
        pair = persons[person]
        by_role = {r.role: r for r in pair}
        pick = Role.AFTER if rng.coin() else Role.BEFORE
        test_ids.append(by_role[pick].record_id)
    test_set = set(test_ids)
    train_ids = [r.record_id for r in ds.records if r.record_id not in test_set]
    return SplitPlan(Protocol.WITHIN_PERSON, tuple(train_ids), tuple(test_ids), seed)


def save_split(plan: SplitPlan, path: str | Path) -> None:
    """Write `record_id,side` rows with a comment line pinning protocol and seed."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# protocol={plan.protocol.value} seed={plan.seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id", "side"])
        for rid in plan.train_ids:
            writer.writerow([rid, "train"])
        for rid in plan.test_ids:
            writer.writerow([rid, "test"])


def load_split(path: str | Path) -> SplitPlan:
    with open(path, newline="", encoding="utf-8") as fh:
        comment = fh.readline().strip()
        if not comment.startswith("# protocol="):
            raise FormatError(f"{path}: missing protocol/seed comment line")
        try:
            fields = dict(part.split("=", 1) for part in comment[2:].split())
            protocol = Protocol(fields["protocol"])
            seed = int(fields["seed"])
        except (KeyError, ValueError) as exc:
            raise FormatError(f"{path}: malformed comment line: {exc}") from None
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["record_id", "side"]:
            raise FormatError(f"{path}: expected header record_id,side")
        train: list[str] = []
        test: list[str] = []
        for lineno, row in enumerate(reader, start=3):
            if not row:
                continue
            if len(row) != 2 or row[1] not in ("train", "test"):
                raise ParseError(f"{path}: line {lineno}: expected `id,train|test`")
            (train if row[1] == "train" else test).append(row[0])
    return SplitPlan(protocol, tuple(train), tuple(test), seed)
