"""Metadata parsing, the F2BE embedding container, and dataset assembly.

The F2BE file is the boundary between this package and whatever produced
the embeddings. Layout (all integers little-endian):

    magic  4 bytes   b"F2BE"
    u16    version   currently 1
    u32    dim       vector length, identical for every record
    u64    count     number of records
    per record:
        u16    byte length of the UTF-8 record id
        bytes  record id
        f32[]  dim values

Records are written sorted by record id so a rebuilt file is byte-stable.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .domain import FaceRecord, Gender, Role
from .errors import (
    CorruptionError,
    FormatError,
    IntegrityError,
    ParseError,
    ValidationError,
)

F2BE_MAGIC = b"F2BE"
F2BE_VERSION = 1

METADATA_COLUMNS = (
    "record_id",
    "person_id",
    "role",
    "gender",
    "height_m",
    "weight_kg",
    "race",
)


def load_metadata(path: str | Path) -> list[FaceRecord]:
    """Parse the subject metadata CSV into FaceRecords, preserving row order."""
    records: list[FaceRecord] = []
    seen_record_ids: set[str] = set()
    seen_person_roles: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty metadata file") from None
        if tuple(h.strip() for h in header) != METADATA_COLUMNS:
            raise ParseError(
                f"{path}: line 1: expected header {','.join(METADATA_COLUMNS)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(METADATA_COLUMNS):
                raise ParseError(
                    f"{path}: line {lineno}: expected {len(METADATA_COLUMNS)} fields, got {len(row)}"
                )
            record_id, person_id, role_s, gender_s, height_s, weight_s, race_s = (
                f.strip() for f in row
            )
            try:
                role = Role(role_s.lower())
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}: role must be before/after, got {role_s!r}"
                ) from None
            try:
                gender = Gender(gender_s.upper())
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}: gender must be M/F, got {gender_s!r}"
                ) from None
            try:
                height_m = float(height_s)
                weight_kg = float(weight_s)
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}: height/weight must be numeric"
                ) from None
            if not record_id or not person_id:
                raise ParseError(f"{path}: line {lineno}: empty record or person id")
            if record_id in seen_record_ids:
                raise IntegrityError(f"{path}: duplicate record_id {record_id!r}")
            key = (person_id, role.value)
            if key in seen_person_roles:
                raise IntegrityError(
                    f"{path}: duplicate (person_id, role) {key!r}"
                )
            try:
                record = FaceRecord.from_measurements(
                    record_id,
                    person_id,
                    role,
                    gender,
                    height_m,
                    weight_kg,
                    race=race_s or None,
                )
            except Exception as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
            seen_record_ids.add(record_id)
            seen_person_roles.add(key)
            records.append(record)
    return records


def write_embeddings(path: str | Path, vectors: Mapping[str, np.ndarray]) -> None:
    """Write an F2BE file; records sorted by id for determinism."""
    if not vectors:
        raise ValidationError("cannot write an empty embedding map (dim undefined)")
    arrays: dict[str, np.ndarray] = {}
    dim = None
    for record_id, values in vectors.items():
        arr = np.asarray(values, dtype=np.float32).reshape(-1)
        if dim is None:
            dim = arr.shape[0]
        elif arr.shape[0] != dim:
            raise ValidationError(
                f"mixed embedding dims: {record_id!r} has {arr.shape[0]}, expected {dim}"
            )
        if not np.isfinite(arr).all():
            raise ValidationError(f"embedding {record_id!r} has non-finite values")
        arrays[record_id] = arr
    if dim == 0:
        raise ValidationError("embedding dim must be positive")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sHIQ", F2BE_MAGIC, F2BE_VERSION, dim, len(arrays)))
        for record_id in sorted(arrays):
            encoded = record_id.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise ValidationError(f"record id too long: {record_id[:32]!r}...")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(arrays[record_id].astype("<f4").tobytes())


def read_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    """Read an F2BE file into a map record_id -> float32 vector."""
    with open(path, "rb") as fh:
        data = fh.read()
    header_size = struct.calcsize("<4sHIQ")
    if len(data) < header_size:
        raise FormatError(f"{path}: too short to hold an F2BE header")
    magic, version, dim, count = struct.unpack_from("<4sHIQ", data, 0)
    if magic != F2BE_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != F2BE_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dim == 0:
        raise FormatError(f"{path}: embedding dim must be positive")
    offset = header_size
    vectors: dict[str, np.ndarray] = {}
    vec_bytes = 4 * dim
    for index in range(count):
        if offset + 2 > len(data):
            raise CorruptionError(
                f"{path}: truncated at record {index} of {count} (id length)"
            )
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + vec_bytes > len(data):
            raise CorruptionError(f"{path}: truncated at record {index} of {count}")
        try:
            record_id = data[offset : offset + id_len].decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptionError(
                f"{path}: record {index} id is not valid UTF-8"
            ) from None
        offset += id_len
        values = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += vec_bytes
        if not np.isfinite(values).all():
            raise ValidationError(f"{path}: embedding {record_id!r} has NaN/Inf values")
        if record_id in vectors:
            raise IntegrityError(f"{path}: duplicate record id {record_id!r}")
        vectors[record_id] = values
    if offset != len(data):
        raise CorruptionError(f"{path}: {len(data) - offset} trailing bytes after payload")
    return vectors


@dataclass
class BuildReport:
    """Exact accounting of what was excluded while joining records to embeddings."""

    orphan_records: list[str] = field(default_factory=list)
    orphan_embeddings: list[str] = field(default_factory=list)
    incomplete_persons: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (
            self.orphan_records or self.orphan_embeddings or self.incomplete_persons
        )

    def summary(self) -> str:
        return (
            f"{len(self.orphan_records)} record(s) without embeddings, "
            f"{len(self.orphan_embeddings)} embedding(s) without records, "
            f"{len(self.incomplete_persons)} person(s) missing a before/after sibling"
        )


@dataclass
class Dataset:
    """Joined, validated records plus their feature matrix.

    X rows are float64 and aligned with `records`; they are unit-normalized
    when `normalize` is set, and every downstream consumer (training,
    prediction, evaluation) works in this space.
    """

    records: list[FaceRecord]
    X: np.ndarray
    dim: int
    normalize: bool
    _index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self._index:
            self._index = {r.record_id: i for i, r in enumerate(self.records)}

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def ids(self) -> list[str]:
        return [r.record_id for r in self.records]

    def record(self, record_id: str) -> FaceRecord:
        return self.records[self._index[record_id]]

    def vector(self, record_id: str) -> np.ndarray:
        return self.X[self._index[record_id]]

    def bmi(self, record_id: str) -> float:
        return self.records[self._index[record_id]].bmi

    def matrix_for(self, ids: Iterable[str]) -> np.ndarray:
        rows = [self._index[i] for i in ids]
        return self.X[rows]

    def bmis_for(self, ids: Iterable[str]) -> np.ndarray:
        return np.array([self.bmi(i) for i in ids], dtype=np.float64)

    def persons(self) -> dict[str, list[FaceRecord]]:
        """person_id -> records, in dataset order."""
        out: dict[str, list[FaceRecord]] = {}
        for rec in self.records:
            out.setdefault(rec.person_id, []).append(rec)
        return out


def build_dataset(
    records: Iterable[FaceRecord],
    embeddings: Mapping[str, np.ndarray],
    normalize: bool = True,
) -> tuple[Dataset, BuildReport]:
    """Inner-join records with embeddings and assemble the feature matrix.

    Records without embeddings, embeddings without records, and persons
    left without a complete before/after pair are excluded and reported,
    never dropped silently.
    """
    records = list(records)
    seen: set[str] = set()
    for rec in records:
        if rec.record_id in seen:
            raise IntegrityError(f"duplicate record_id {rec.record_id!r}")
        seen.add(rec.record_id)

    report = BuildReport()
    joined = [r for r in records if r.record_id in embeddings]
    report.orphan_records = [r.record_id for r in records if r.record_id not in embeddings]
    record_ids = {r.record_id for r in records}
    report.orphan_embeddings = sorted(k for k in embeddings if k not in record_ids)

    roles_by_person: dict[str, set[Role]] = {}
    for rec in joined:
        roles_by_person.setdefault(rec.person_id, set()).add(rec.role)
    complete = {p for p, roles in roles_by_person.items() if roles == {Role.BEFORE, Role.AFTER}}
    report.incomplete_persons = sorted(set(roles_by_person) - complete)
    final = [r for r in joined if r.person_id in complete]

    dim = None
    for rec in final:
        vec = embeddings[rec.record_id]
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise ValidationError(
                f"embedding {rec.record_id!r} has dim {len(vec)}, expected {dim}"
            )
    if dim is None:
        dim = 0

    X = np.zeros((len(final), dim), dtype=np.float64)
    for i, rec in enumerate(final):
        row = np.asarray(embeddings[rec.record_id], dtype=np.float64)
        if not np.isfinite(row).all():
            raise ValidationError(f"embedding {rec.record_id!r} has non-finite values")
        if normalize:
            norm = float(np.linalg.norm(row))
            if norm == 0.0:
                raise ValidationError(
                    f"embedding {rec.record_id!r} has zero norm; cannot unit-normalize"
                )
            row = row / norm
        X[i] = row

    ds = Dataset(records=final, X=X, dim=dim, normalize=normalize)
    return ds, report
