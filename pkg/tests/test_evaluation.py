import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthdata import ConstantModel, make_dataset, oracle_model

from face2bmi.errors import (
    CapacityError,
    UndefinedCorrelationError,
    ValidationError,
)
from face2bmi.evaluation import (
    CATEGORY_ORDER,
    GenderCategory,
    Truth,
    answer_pairs,
    evaluate_regression,
    export_questionnaire,
    generate_pairs,
    pearson,
    score_human_answers,
)
from face2bmi.kernels import KernelKind, KernelSpec
from face2bmi.splits import split_across_people
from face2bmi.svr import SvrHyperParams, train


class TestPearson:
    def test_perfect_linear(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_perfect_inverse(self):
        assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0)

    def test_partial(self):
        # oracle: hand evaluation of the product-moment formula gives 0.8
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, rel=1e-12)

    def test_zero_variance(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            pearson([1, 2], [1, 2, 3])

    @settings(max_examples=50, deadline=None)
    @given(
        data=st.lists(
            st.tuples(
                st.floats(min_value=-100, max_value=100),
                st.floats(min_value=-100, max_value=100),
            ),
            min_size=3,
            max_size=30,
        ),
        a=st.floats(min_value=-5, max_value=5).filter(lambda v: abs(v) > 1e-3),
        b=st.floats(min_value=-10, max_value=10),
    )
    def test_bounded_symmetric_scale_invariant(self, data, a, b):
        xs = np.array([d[0] for d in data])
        ys = np.array([d[1] for d in data])
        if np.ptp(xs) < 1e-6 or np.ptp(ys) < 1e-6:
            return
        r = pearson(xs, ys)
        assert -1.0 - 1e-12 <= r <= 1.0 + 1e-12
        assert pearson(ys, xs) == pytest.approx(r, abs=1e-12)
        assert pearson(a * xs + b, ys) == pytest.approx(np.sign(a) * r, abs=1e-9)


class TestEvaluateRegression:
    def test_synthetic_recovery(self):
        ds = make_dataset(n_persons=200, dim=16, seed=0)
        plan = split_across_people(ds, test_fraction=0.2, seed=100)
        model = train(
            ds,
            list(plan.train_ids),
            KernelSpec(),
            SvrHyperParams(c=10.0, epsilon=0.25),
        )
        report = evaluate_regression(model, ds, plan)
        assert report.pearson_overall >= 0.95
        assert report.pearson_male is not None and report.pearson_male > 0.9
        assert report.pearson_female is not None and report.pearson_female > 0.9
        assert report.n_test == len(plan.test_ids)

    def test_constant_model_is_undefined(self):
        ds = make_dataset(n_persons=20, dim=4, seed=1)
        plan = split_across_people(ds, test_fraction=0.25, seed=1)
        # a real trained model whose predictions collapse: epsilon swallows everything
        model = train(ds, list(plan.train_ids), KernelSpec(), SvrHyperParams(epsilon=50.0))
        with pytest.raises(UndefinedCorrelationError):
            evaluate_regression(model, ds, plan)

    def test_normalization_mismatch_rejected(self):
        ds = make_dataset(n_persons=20, dim=4, seed=1)
        plan = split_across_people(ds, test_fraction=0.25, seed=1)
        model = train(ds, list(plan.train_ids), KernelSpec(), SvrHyperParams(c=5.0, epsilon=0.2))
        model.normalize = False
        with pytest.raises(ValidationError, match="normalization"):
            evaluate_regression(model, ds, plan)

    def test_support_leakage_rejected(self):
        ds = make_dataset(n_persons=20, dim=4, seed=1)
        plan = split_across_people(ds, test_fraction=0.25, seed=1)
        model = train(ds, list(ds.ids()), KernelSpec(), SvrHyperParams(c=5.0, epsilon=0.2))
        with pytest.raises(ValidationError, match="training side"):
            evaluate_regression(model, ds, plan)


def _pair_pool(n_persons=400, seed=0):
    """Wide-BMI pool so every (category, bucket) cell is fillable."""
    return make_dataset(n_persons=n_persons, dim=8, seed=seed, signal=28.0, base=30.0)


class TestGeneratePairs:
    def test_default_task_shape(self):
        ds = _pair_pool()
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=7)
        assert len(pairs) == 900
        counts = {}
        for p in pairs:
            counts[(p.gender_category, p.bucket)] = counts.get((p.gender_category, p.bucket), 0) + 1
        assert all(
            counts[(cat, b)] == 20 for cat in CATEGORY_ORDER for b in range(15)
        )

    def test_bucket_inequality_strict(self):
        ds = _pair_pool(seed=3)
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=11)
        for p in pairs:
            delta = abs(ds.bmi(p.id_a) - ds.bmi(p.id_b))
            assert 0.5 + p.bucket < delta <= 1.5 + p.bucket

    def test_mixed_cells_balanced(self):
        ds = _pair_pool(seed=4)
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=12)
        for bucket in range(15):
            cell = [
                p
                for p in pairs
                if p.gender_category == GenderCategory.FEMALE_MALE and p.bucket == bucket
            ]
            male_higher = 0
            for p in cell:
                higher_id = p.id_a if p.truth == Truth.A_IS_HIGHER else p.id_b
                male_higher += ds.record(higher_id).gender.value == "M"
            assert male_higher == len(cell) - male_higher == 10

    def test_no_repeats_and_distinct_persons(self):
        ds = _pair_pool(seed=5)
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=13)
        keys = {tuple(sorted((p.id_a, p.id_b))) for p in pairs}
        assert len(keys) == len(pairs)
        for p in pairs:
            assert ds.record(p.id_a).person_id != ds.record(p.id_b).person_id

    def test_determinism(self):
        ds = _pair_pool(seed=6)
        assert generate_pairs(ds, ds.ids(), seed=9) == generate_pairs(ds, ds.ids(), seed=9)

    def test_capacity_error_names_cell(self):
        ds = make_dataset(n_persons=6, dim=4, seed=0)  # tiny pool
        with pytest.raises(CapacityError, match=r"bucket"):
            generate_pairs(ds, ds.ids(), per_category=300, seed=1)

    def test_per_category_validation(self):
        ds = _pair_pool(seed=6)
        with pytest.raises(ValidationError):
            generate_pairs(ds, ds.ids(), per_category=100, seed=1)  # not /15
        with pytest.raises(ValidationError):
            generate_pairs(ds, ds.ids(), per_category=15, seed=1)  # odd cells


class TestAnswerPairs:
    def test_oracle_model_is_perfect(self):
        ds = _pair_pool(seed=8)
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=21)
        report = answer_pairs(oracle_model(ds), ds, pairs)
        assert report.pair_accuracy_overall == 1.0
        assert all(c == t for c, t in report.pair_cells.values())
        assert sum(t for _, t in report.pair_cells.values()) == len(pairs)

    def test_constant_model_scores_zero(self):
        ds = _pair_pool(seed=8)
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=21)
        report = answer_pairs(ConstantModel(27.3), ds, pairs)
        assert report.pair_accuracy_overall == 0.0

    def test_trained_model_improves_with_bucket(self):
        ds = _pair_pool(seed=9)
        plan = split_across_people(ds, test_fraction=0.5, seed=22)
        model = train(
            ds,
            list(plan.train_ids),
            KernelSpec(KernelKind.RBF, gamma=1.75),
            SvrHyperParams(c=20.0, epsilon=0.25),
        )
        pairs = generate_pairs(ds, list(plan.test_ids), per_category=300, seed=23)
        report = answer_pairs(model, ds, pairs)
        by_bucket = {b: [0, 0] for b in range(15)}
        for (cat, b), (c, t) in report.pair_cells.items():
            by_bucket[b][0] += c
            by_bucket[b][1] += t
        low = sum(by_bucket[b][0] for b in range(5)) / sum(by_bucket[b][1] for b in range(5))
        high = sum(by_bucket[b][0] for b in range(10, 15)) / sum(
            by_bucket[b][1] for b in range(10, 15)
        )
        assert high >= low
        assert high > 0.95


class TestQuestionnaire:
    def test_export_and_key(self, tmp_path):
        ds = _pair_pool(seed=10)
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=31)
        qpath = tmp_path / "task.csv"
        kpath = export_questionnaire(pairs, ds, qpath, seed=5)
        qrows = list(csv.DictReader(qpath.open()))
        krows = list(csv.DictReader(kpath.open()))
        assert len(qrows) == len(krows) == 900
        assert set(qrows[0]) == {"pair_id", "image_a", "image_b"}
        swapped = 0
        for q, k in zip(qrows, krows):
            assert q["pair_id"] == k["pair_id"]
            assert {q["image_a"], q["image_b"]} == {k["left_id"], k["right_id"]}
            assert k["higher_side"] in ("left", "right")
            swapped += q["image_a"] != k["left_id"] or 0
        # key carries truth; questionnaire must not
        assert "higher_side" not in qrows[0]

    def test_same_seed_same_bytes(self, tmp_path):
        ds = _pair_pool(seed=10)
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=31)
        k1 = export_questionnaire(pairs, ds, tmp_path / "a.csv", seed=5)
        k2 = export_questionnaire(pairs, ds, tmp_path / "b.csv", seed=5)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert k1.read_bytes() == k2.read_bytes()

    def test_empty_pairs_writes_headers(self, tmp_path):
        ds = make_dataset(n_persons=4, dim=4, seed=0)
        key = export_questionnaire([], ds, tmp_path / "q.csv", seed=0)
        assert (tmp_path / "q.csv").read_text() == "pair_id,image_a,image_b\n"
        assert key.read_text().startswith("pair_id,left_id,right_id,higher_side")

    def test_human_answer_scoring(self, tmp_path):
        ds = _pair_pool(seed=10)
        pairs = generate_pairs(ds, ds.ids(), per_category=300, seed=31)[:30]
        qpath = tmp_path / "task.csv"
        kpath = export_questionnaire(pairs, ds, qpath, seed=5)
        krows = list(csv.DictReader(kpath.open()))
        answers = tmp_path / "answers.csv"
        with answers.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pair_id", "answer"])
            for i, row in enumerate(krows):
                # first 20 correct, last 10 wrong
                side = row["higher_side"]
                if i >= 20:
                    side = "left" if side == "right" else "right"
                w.writerow([row["pair_id"], side])
        report = score_human_answers(kpath, answers)
        assert report.n_pairs == 30
        assert report.pair_accuracy_overall == pytest.approx(20 / 30)
