import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import formula_metrics
from knnesa.errors import FormatError, KnnEsaError
from knnesa.metrics import aggregate, evaluate, evaluate_run, example_metrics, format_table, read_label_file

labelsets = st.sets(st.sampled_from("ABCDEFGH"), max_size=6)


class TestExampleMetrics:
    def test_partial_overlap(self):
        p, r, f, a = example_metrics({"A", "B", "C"}, {"B", "C", "D"})
        assert (p, r, f, a) == pytest.approx((2 / 3, 2 / 3, 2 / 3, 0.5))

    def test_perfect(self):
        assert example_metrics({"A"}, {"A"}) == (1.0, 1.0, 1.0, 1.0)

    def test_disjoint(self):
        assert example_metrics({"A"}, {"B", "C"}) == (0.0, 0.0, 0.0, 0.0)

    def test_empty_prediction(self):
        assert example_metrics({"A"}, set()) == (0.0, 0.0, 0.0, 0.0)

    def test_both_empty(self):
        with pytest.raises(KnnEsaError):
            example_metrics(set(), set())

    @settings(max_examples=300, deadline=None)
    @given(labelsets.filter(bool), labelsets.filter(bool))
    def test_properties(self, y, z):
        p, r, f, a = example_metrics(y, z)
        assert a <= f <= 1.0
        assert example_metrics(z, y) == (r, p, f, a)
        if p > 0 and r > 0:
            assert abs(f - 2 * p * r / (p + r)) <= 1e-12


class TestAggregate:
    def test_single(self):
        rep = aggregate([(0.5, 0.25, 1 / 3, 0.2)])
        assert (rep.ebp, rep.ebr, rep.ebf, rep.acc, rep.m) == (0.5, 0.25, 1 / 3, 0.2, 1)

    def test_mean(self):
        assert aggregate([(0, 0, 0, 0), (1, 1, 1, 1)]).acc == 0.5

    def test_empty(self):
        with pytest.raises(KnnEsaError):
            aggregate([])

    def test_matches_summation_oracle(self):
        rng = random.Random(3)
        rows = []
        for _ in range(50):
            y = set(rng.sample("ABCDEFGHIJ", rng.randint(1, 5)))
            z = set(rng.sample("ABCDEFGHIJ", rng.randint(0, 5)))
            rows.append(formula_metrics(y, z))
        rep = aggregate(rows)
        for j, got in enumerate((rep.ebp, rep.ebr, rep.ebf, rep.acc)):
            total = 0.0
            for row in rows:
                total += row[j]
            assert abs(got - total / 50) <= 1e-12


class TestEvaluate:
    def test_identical(self):
        gold = {"a": ["X", "Y"], "b": ["Z"]}
        rep = evaluate(gold, gold)
        assert (rep.ebp, rep.ebr, rep.ebf, rep.acc, rep.m) == (1.0, 1.0, 1.0, 1.0, 2)

    def test_missing_and_empty_predictions(self):
        rep = evaluate({"a": ["X"], "b": ["Y"], "c": ["Z"]}, {"a": ["X"], "b": []})
        assert rep.ebp == pytest.approx(1 / 3) and rep.empty_predictions == 2

    def test_empty_gold_excluded(self):
        rep = evaluate({"a": ["X"], "b": []}, {"a": ["X"], "b": ["Y"]})
        assert rep.m == 1 and rep.excluded == 1 and rep.ebf == 1.0

    def test_unknown_prediction_ids(self):
        with pytest.raises(KnnEsaError, match="zz"):
            evaluate({"a": ["X"]}, {"a": ["X"], "zz": ["Y"]})


class TestFiles:
    def write(self, path, rows):
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        return path

    def test_twenty_document_fixture(self, tmp_path):
        rng = random.Random(20)
        gold_rows, pred_rows, oracle = [], [], []
        for i in range(20):
            y = sorted(rng.sample("ABCDEFG", rng.randint(1, 4)))
            z = sorted(rng.sample("ABCDEFG", rng.randint(0, 4)))
            gold_rows.append({"id": f"d{i:02d}", "title": "", "abstract": "", "labels": y})
            pred_rows.append({"id": f"d{i:02d}", "labels": z, "ranked": []})
            oracle.append(formula_metrics(y, z))
        gold = self.write(tmp_path / "gold.jsonl", gold_rows)
        pred = self.write(tmp_path / "pred.jsonl", pred_rows)
        rep = evaluate_run(gold, pred)[str(pred)]
        for j, got in enumerate((rep.ebp, rep.ebr, rep.ebf, rep.acc)):
            assert got == pytest.approx(sum(o[j] for o in oracle) / 20, abs=1e-12)
        table = format_table([dict(rep.to_json(), run="pred")], ["run", "ebp", "ebf", "m"])
        assert f"{rep.ebf:.4f}" in table and "20" in table

    def test_duplicate_id(self, tmp_path):
        path = self.write(tmp_path / "p.jsonl", [{"id": "a", "labels": []}, {"id": "a", "labels": []}])
        with pytest.raises(FormatError, match="line 2"):
            read_label_file(path)

    def test_report_fields(self, tmp_path):
        gold = self.write(tmp_path / "g.jsonl", [{"id": "a", "labels": ["X"]}])
        rep = evaluate_run(gold, [gold])[str(gold)]
        assert set(rep.to_json()) >= {"ebp", "ebr", "ebf", "acc", "m", "excluded"}
        assert "per_doc" in rep.to_json(per_doc=True)
