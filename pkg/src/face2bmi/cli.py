"""Command-line entry point: split, train, predict, eval, pairs, bias.

Exit codes: 0 success, 1 input/validation/format fault, 2 algorithmic
non-success (solver did not converge, sampling pool too small). All
randomness flows from --seed, so identical invocations write identical
bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import bias as bias_mod
from . import evaluation, splits, svr
from .dataset import build_dataset, load_metadata, read_embeddings
from .errors import AlgorithmError, InputError
from .kernels import KernelKind, KernelSpec


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is exit 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metadata", required=True, help="subject metadata CSV")
    p.add_argument("--embeddings", required=True, help="F2BE embedding file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="f2b", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p_split = sub.add_parser("split", help="write a train/test split plan")
    _add_data_args(p_split)
    p_split.add_argument(
        "--protocol",
        required=True,
        choices=[p.value for p in splits.Protocol],
    )
    group = p_split.add_mutually_exclusive_group(required=True)
    group.add_argument("--test-fraction", type=float)
    group.add_argument("--n-test", type=int)
    p_split.add_argument("--seed", type=int, default=42)
    p_split.add_argument("--output", required=True)

    p_train = sub.add_parser("train", help="train an epsilon-SVR on the train side")
    _add_data_args(p_train)
    p_train.add_argument("--split", required=True)
    p_train.add_argument("--kernel", choices=["linear", "rbf"], default="linear")
    p_train.add_argument("--gamma", type=float, default=None)
    p_train.add_argument("--c", type=float, default=1.0)
    p_train.add_argument("--epsilon", type=float, default=1.0)
    p_train.add_argument("--tolerance", type=float, default=1e-3)
    p_train.add_argument("--max-passes", type=int, default=None)
    p_train.add_argument(
        "--no-normalize",
        action="store_true",
        help="train on raw embeddings instead of unit-normalized ones",
    )
    p_train.add_argument("--seed", type=int, default=42)
    p_train.add_argument("--output", required=True, help="model JSON path")

    p_pred = sub.add_parser("predict", help="predict BMI for every embedding in a file")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--embeddings", required=True)
    p_pred.add_argument("--output", required=True, help="CSV record_id,predicted_bmi")

    p_eval = sub.add_parser("eval", help="Pearson r of a model on the test side")
    _add_data_args(p_eval)
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--split", required=True)
    p_eval.add_argument(
        "--per-gender",
        action="store_true",
        help="also print the per-gender breakdown",
    )
    p_eval.add_argument("--output", default=None, help="report JSON path")

    p_pairs = sub.add_parser("pairs", help="stratified comparison task from the test side")
    _add_data_args(p_pairs)
    p_pairs.add_argument("--split", required=True)
    p_pairs.add_argument("--per-category", type=int, default=300)
    p_pairs.add_argument("--seed", type=int, default=42)
    p_pairs.add_argument("--model", default=None, help="answer the pairs with this model")
    p_pairs.add_argument(
        "--export-questionnaire",
        default=None,
        metavar="PATH",
        help="write blinded questionnaire CSV (+ .key sidecar) here",
    )
    p_pairs.add_argument("--output", required=True, help="pairs JSON path")

    p_bias = sub.add_parser("bias", help="matched-pair audit of prediction bias")
    _add_data_args(p_bias)
    p_bias.add_argument("--split", required=True)
    p_bias.add_argument("--model", required=True)
    p_bias.add_argument(
        "--group-attr", required=True, choices=[a.value for a in bias_mod.GroupAttr]
    )
    p_bias.add_argument(
        "--groups", required=True, help="comma-separated pair of group labels, e.g. F,M"
    )
    p_bias.add_argument("--n-pairs", type=int, default=2000)
    p_bias.add_argument(
        "--include-train",
        action="store_true",
        help="widen the pool to training records (recorded in the report)",
    )
    p_bias.add_argument("--seed", type=int, default=42)
    p_bias.add_argument("--output", required=True, help="audit JSON path")

    return parser


def _load_dataset(args, normalize: bool = True):
    records = load_metadata(args.metadata)
    embeddings = read_embeddings(args.embeddings)
    ds, report = build_dataset(records, embeddings, normalize=normalize)
    if not report.clean:
        print(f"note: excluded from dataset: {report.summary()}", file=sys.stderr)
    return ds


def _cmd_split(args) -> int:
    ds = _load_dataset(args)
    if args.protocol == splits.Protocol.ACROSS_PEOPLE.value:
        plan = splits.split_across_people(
            ds, test_fraction=args.test_fraction, n_test=args.n_test, seed=args.seed
        )
    else:
        if args.n_test is None:
            raise InputError("within-person protocol needs --n-test")
        plan = splits.split_within_person(ds, args.n_test, seed=args.seed)
    splits.save_split(plan, args.output)
    print(
        f"{plan.protocol.value}: {len(plan.train_ids)} train / {len(plan.test_ids)} test "
        f"-> {args.output}"
    )
    return 0


def _cmd_train(args) -> int:
    ds = _load_dataset(args, normalize=not args.no_normalize)
    plan = splits.load_split(args.split)
    kernel = KernelSpec(kind=KernelKind(args.kernel), gamma=args.gamma)
    params = svr.SvrHyperParams(
        c=args.c,
        epsilon=args.epsilon,
        tolerance=args.tolerance,
        max_passes=args.max_passes,
    )
    model = svr.train(ds, list(plan.train_ids), kernel, params, seed=args.seed)
    svr.save_model(model, args.output)
    print(
        f"trained on {len(plan.train_ids)} records: {len(model.support_ids)} support "
        f"vectors, bias {model.bias:.4f} -> {args.output}"
    )
    return 0


def _cmd_predict(args) -> int:
    model = svr.load_model(args.model)
    embeddings = read_embeddings(args.embeddings)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["record_id", "predicted_bmi"])
        for record_id in sorted(embeddings):
            x = np.asarray(embeddings[record_id], dtype=np.float64)
            if model.normalize:
                norm = float(np.linalg.norm(x))
                if norm == 0.0:
                    raise InputError(f"embedding {record_id!r} has zero norm")
                x = x / norm
            writer.writerow([record_id, repr(model.predict(x))])
    print(f"{len(embeddings)} predictions -> {args.output}")
    return 0


def _cmd_eval(args) -> int:
    model = svr.load_model(args.model)
    ds = _load_dataset(args, normalize=model.normalize)
    plan = splits.load_split(args.split)
    report = evaluation.evaluate_regression(model, ds, plan)

    print(f"{'metric':<20} {'value':>10}")
    print("-" * 31)
    print(f"{'pearson_overall':<20} {report.pearson_overall:>10.4f}")
    if args.per_gender:
        for name, value in (
            ("pearson_male", report.pearson_male),
            ("pearson_female", report.pearson_female),
        ):
            shown = f"{value:.4f}" if value is not None else "n/a"
            print(f"{name:<20} {shown:>10}")
    print(f"{'n_test':<20} {report.n_test:>10d}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def _cmd_pairs(args) -> int:
    model = svr.load_model(args.model) if args.model else None
    ds = _load_dataset(args, normalize=model.normalize if model else True)
    plan = splits.load_split(args.split)
    pairs = evaluation.generate_pairs(
        ds, list(plan.test_ids), per_category=args.per_category, seed=args.seed
    )
    payload: dict = {
        "seed": args.seed,
        "per_category": args.per_category,
        "pairs": [
            {
                "id_a": p.id_a,
                "id_b": p.id_b,
                "gender_category": p.gender_category.value,
                "bucket": p.bucket,
                "truth": p.truth.value,
            }
            for p in pairs
        ],
    }
    if args.export_questionnaire:
        key_path = evaluation.export_questionnaire(
            pairs, ds, args.export_questionnaire, seed=args.seed
        )
        print(f"questionnaire -> {args.export_questionnaire} (key: {key_path})")
    if model is not None:
        report = evaluation.answer_pairs(model, ds, pairs)
        payload["machine"] = report.to_dict()["pair_task"]
        print(f"machine accuracy: {report.pair_accuracy_overall:.4f} on {len(pairs)} pairs")
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"{len(pairs)} pairs -> {args.output}")
    return 0


def _cmd_bias(args) -> int:
    model = svr.load_model(args.model)
    ds = _load_dataset(args, normalize=model.normalize)
    plan = splits.load_split(args.split)
    try:
        group_x, group_y = (g.strip() for g in args.groups.split(","))
    except ValueError:
        raise InputError("--groups must be two comma-separated labels") from None
    pool_ids = list(plan.test_ids)
    pool_name = "test"
    if args.include_train:
        pool_ids = list(plan.train_ids) + pool_ids
        pool_name = "train+test"
    pairs = bias_mod.build_audit_pairs(
        ds,
        pool_ids,
        bias_mod.GroupAttr(args.group_attr),
        group_x,
        group_y,
        args.n_pairs,
        seed=args.seed,
    )
    report = bias_mod.run_audit(model, ds, pairs, pool=pool_name, seed=args.seed)
    bias_mod.save_audit_report(report, args.output)
    print(report.summary())
    return 0


_COMMANDS = {
    "split": _cmd_split,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "pairs": _cmd_pairs,
    "bias": _cmd_bias,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AlgorithmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
