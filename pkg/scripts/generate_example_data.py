#!/usr/bin/env python3
"""Write a small synthetic metadata CSV + F2BE embedding file.

Gives the CLI something to chew on without any real data:

    python3 scripts/generate_example_data.py --out-dir example_data
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from face2bmi.dataset import write_embeddings
from face2bmi.domain import FaceRecord, Gender, Role


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="example_data")
    parser.add_argument("--persons", type=int, default=400)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    w = rng.normal(size=args.dim)
    # unit-norm features: BMI signal std is |w| / sqrt(dim); target ~6.5
    w *= 6.5 * np.sqrt(args.dim) / np.linalg.norm(w)

    records: list[FaceRecord] = []
    embeddings: dict[str, np.ndarray] = {}
    races = ("white", "african_american")
    for p in range(args.persons):
        person = f"p{p:04d}"
        gender = Gender.MALE if p % 2 == 0 else Gender.FEMALE
        race = races[(p // 2) % 2]
        latent = rng.normal(size=args.dim)
        for role, tag in ((Role.BEFORE, "b"), (Role.AFTER, "a")):
            e = latent + 0.1 * rng.normal(size=args.dim)
            e32 = (e / np.linalg.norm(e)).astype(np.float32)
            feat = e32.astype(np.float64)
            feat /= np.linalg.norm(feat)
            bmi = float(np.clip(30.0 + feat @ w + 0.5 * rng.normal(), 12.0, 75.0))
            rid = f"{person}_{tag}"
            records.append(
                FaceRecord.from_measurements(
                    rid, person, role, gender, 1.7, bmi * 1.7 * 1.7, race=race
                )
            )
            embeddings[rid] = e32

    meta_path = out / "metadata.csv"
    with meta_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["record_id", "person_id", "role", "gender", "height_m", "weight_kg", "race"]
        )
        for r in records:
            writer.writerow(
                [r.record_id, r.person_id, r.role.value, r.gender.value,
                 repr(r.height_m), repr(r.weight_kg), r.race or ""]
            )
    emb_path = out / "embeddings.f2be"
    write_embeddings(emb_path, embeddings)
    print(f"{len(records)} records -> {meta_path}")
    print(f"{len(embeddings)} embeddings (dim {args.dim}) -> {emb_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
