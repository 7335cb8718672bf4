from __future__ import annotations

import random

import numpy as np
import pytest

from framekit.corpus import FeAnnotation, FrameInstance, Span
from framekit.errors import DegenerateVariance, EmptyScoreList
from framekit.evaluation import (
    CorrelationRow,
    InstanceScore,
    MatchingPolicy,
    aggregate,
    f1_quartiles,
    load_correlation_csv,
    partial_correlation,
    per_frame_distribution,
    score_instance,
    split_report,
    write_per_frame_csv,
)
from framekit.representations import PredictionSet, decode, encode, RepresentationFormat


def _gold(pairs, frame="Donation", sentence_id="s1"):
    """Build a gold instance whose FE texts are the given strings."""
    texts = [text for _, text in pairs]
    sentence = "tgt " + " | ".join(texts) if texts else "tgt only"
    fes = []
    cursor = 4
    for name, text in pairs:
        fes.append(FeAnnotation(name, Span.from_offsets(sentence, cursor, cursor + len(text))))
        cursor += len(text) + 3
    return FrameInstance(
        sentence_id=sentence_id,
        document_id="d",
        sentence_text=sentence,
        frame_name=frame,
        target=(Span.from_offsets(sentence, 0, 3),),
        fes=tuple(fes),
    )


def _pred(pairs, warnings=()):
    return PredictionSet(entries=tuple(pairs), warnings=tuple(warnings))


class TestScoreInstance:
    def test_identical_prediction(self):
        gold = _gold([("Donor", "Your"), ("Recipient", "to Goodwill")])
        score = score_instance(gold, _pred([("Donor", "Your"), ("Recipient", "to Goodwill")]))
        assert (score.tp, score.fp, score.fn, score.exact) == (2, 0, 0, True)

    def test_partial_overlap_hand_count(self):
        gold = _gold([("Donor", "Your"), ("Recipient", "to Goodwill")])
        score = score_instance(gold, _pred([("Donor", "Your"), ("Theme", "x")]))
        assert (score.tp, score.fp, score.fn, score.exact) == (1, 1, 1, False)

    def test_empty_prediction(self):
        gold = _gold([("Donor", "Your"), ("Recipient", "to Goodwill")])
        score = score_instance(gold, _pred([]))
        assert (score.tp, score.fp, score.fn, score.exact) == (0, 0, 2, False)

    def test_empty_gold_and_empty_prediction_is_exact(self):
        score = score_instance(_gold([]), _pred([]))
        assert (score.tp, score.fp, score.fn, score.exact) == (0, 0, 0, True)

    def test_name_must_match_not_just_text(self):
        gold = _gold([("Donor", "Your")])
        score = score_instance(gold, _pred([("Theme", "Your")]))
        assert (score.tp, score.fp, score.fn) == (0, 1, 1)

    def test_order_invariance(self):
        gold = _gold([("A", "x"), ("B", "y"), ("C", "z")])
        forward = score_instance(gold, _pred([("C", "z"), ("A", "x"), ("B", "bad")]))
        backward = score_instance(gold, _pred([("B", "bad"), ("A", "x"), ("C", "z")]))
        assert (forward.tp, forward.fp, forward.fn) == (backward.tp, backward.fp, backward.fn)

    def test_duplicate_names_matched_as_multiset(self):
        gold = _gold([("Goods", "books"), ("Goods", "books")])
        one = score_instance(gold, _pred([("Goods", "books")]))
        assert (one.tp, one.fp, one.fn) == (1, 0, 1)
        three = score_instance(gold, _pred([("Goods", "books")] * 3))
        assert (three.tp, three.fp, three.fn) == (2, 1, 0)

    def test_whitespace_normalization(self):
        gold = _gold([("Donor", "to   Goodwill")])
        score = score_instance(gold, _pred([("Donor", "to Goodwill ")]))
        assert score.exact

    def test_case_preserved_by_default(self):
        gold = _gold([("Donor", "Your")])
        score = score_instance(gold, _pred([("Donor", "your")]))
        assert score.tp == 0
        folded = score_instance(gold, _pred([("Donor", "your")]), MatchingPolicy(case_fold=True))
        assert folded.tp == 1

    def test_exact_iff_no_fp_fn(self):
        gold = _gold([("A", "x")])
        for pred, expected in [
            (_pred([("A", "x")]), True),
            (_pred([("A", "x"), ("B", "y")]), False),
            (_pred([]), False),
        ]:
            assert score_instance(gold, pred).exact is expected

    def test_encode_decode_of_gold_scores_exact(self, mini_lexicon, mini_parts):
        train, test, _ = mini_parts
        for instance in list(train.instances) + list(test.instances):
            frame_def = mini_lexicon.frame(instance.frame_name)
            for fmt in RepresentationFormat:
                pred = decode(fmt, encode(fmt, instance, frame_def), frame_def, instance.sentence_text)
                assert score_instance(instance, pred).exact, (instance.instance_key, fmt)


# --- independent maximum-matching oracle -------------------------------------------


def oracle_max_matching(gold_pairs, pred_pairs):
    """Kuhn's augmenting-path maximum bipartite matching where an edge joins
    equal (name, text) pairs; written independently of the scorer."""
    edges = {
        g: [p for p, pred in enumerate(pred_pairs) if pred == gold]
        for g, gold in enumerate(gold_pairs)
    }
    match_of_pred: dict[int, int] = {}

    def try_assign(g, seen):
        for p in edges[g]:
            if p in seen:
                continue
            seen.add(p)
            if p not in match_of_pred or try_assign(match_of_pred[p], seen):
                match_of_pred[p] = g
                return True
        return False

    matched = 0
    for g in range(len(gold_pairs)):
        if try_assign(g, set()):
            matched += 1
    return matched


class TestMetricOracleEquivalence:
    def test_randomly_corrupted_pairs(self):
        rng = random.Random(20240810)
        names = ["Donor", "Recipient", "Theme", "Goods", "Agent"]
        words = ["alpha", "beta", "gamma", "delta", "epsilon"]
        policy = MatchingPolicy()
        for _ in range(300):
            gold_pairs = [
                (rng.choice(names), " ".join(rng.sample(words, rng.randint(1, 3))))
                for _ in range(rng.randint(0, 5))
            ]
            pred_pairs = list(gold_pairs)
            for _ in range(rng.randint(0, 4)):
                op = rng.randrange(4)
                if op == 0 and pred_pairs:
                    pred_pairs.pop(rng.randrange(len(pred_pairs)))
                elif op == 1 and pred_pairs:
                    i = rng.randrange(len(pred_pairs))
                    pred_pairs[i] = (rng.choice(names + ["Bogus"]), pred_pairs[i][1])
                elif op == 2 and pred_pairs:
                    i = rng.randrange(len(pred_pairs))
                    pred_pairs[i] = (pred_pairs[i][0], pred_pairs[i][1] + "x")
                else:
                    pred_pairs.append((rng.choice(names + ["Bogus"]), rng.choice(words)))
            rng.shuffle(pred_pairs)

            gold = _gold(gold_pairs)
            score = score_instance(gold, _pred(pred_pairs), policy)
            gold_norm = [(n, policy.normalize(t)) for n, t in gold_pairs]
            pred_norm = [(n, policy.normalize(t)) for n, t in pred_pairs]
            tp = oracle_max_matching(gold_norm, pred_norm)
            assert score.tp == tp
            assert score.fp == len(pred_pairs) - tp
            assert score.fn == len(gold_pairs) - tp


class TestAggregate:
    def test_single_perfect_instance(self):
        report = aggregate([InstanceScore("s", "F", 2, 0, 0, True)])
        assert (report.precision, report.recall, report.f1, report.accuracy) == (1.0, 1.0, 1.0, 1.0)

    def test_two_instance_arithmetic(self):
        scores = [
            InstanceScore("a", "F", 1, 1, 1, False),
            InstanceScore("b", "F", 2, 0, 0, True),
        ]
        report = aggregate(scores)
        assert report.precision == pytest.approx(3 / 4)
        assert report.recall == pytest.approx(3 / 4)
        assert report.f1 == pytest.approx(0.75)
        assert report.accuracy == pytest.approx(0.5)

    def test_all_empty_predictions_zero_convention(self):
        scores = [InstanceScore("a", "F", 0, 0, 2, False)]
        report = aggregate(scores)
        assert (report.precision, report.recall, report.f1) == (0.0, 0.0, 0.0)

    def test_empty_list_rejected(self):
        with pytest.raises(EmptyScoreList):
            aggregate([])

    def test_per_frame_micro_counts(self):
        scores = [
            InstanceScore("a", "F", 1, 0, 1, False),
            InstanceScore("b", "F", 1, 0, 0, True),
            InstanceScore("c", "G", 0, 1, 0, False),
        ]
        report = aggregate(scores)
        assert report.per_frame["F"].n == 2
        assert report.per_frame["F"].f1 == pytest.approx(2 * 2 / (2 * 2 + 0 + 1))
        assert report.per_frame["G"].f1 == 0.0

    def test_accuracy_one_iff_all_exact(self):
        exact = [InstanceScore(str(i), "F", 1, 0, 0, True) for i in range(3)]
        assert aggregate(exact).accuracy == 1.0
        mixed = exact + [InstanceScore("x", "F", 0, 1, 0, False)]
        assert aggregate(mixed).accuracy < 1.0

    def test_warning_summary(self):
        scores = [
            InstanceScore("a", "F", 1, 0, 0, True, warnings=("no_code_fence",)),
            InstanceScore("b", "F", 1, 0, 0, True, warnings=("no_code_fence", "unknown_fe")),
        ]
        assert aggregate(scores).warnings == {"no_code_fence": 2, "unknown_fe": 1}


class TestSplitReport:
    def test_single_label_matches_all(self):
        scores = [InstanceScore("a", "F", 1, 0, 0, True)] * 3
        reports = split_report(scores, ["seen"] * 3)
        assert reports["All"] == reports["seen"]

    def test_pooled_counts_equal_all(self):
        rng = random.Random(5)
        scores = [
            InstanceScore(str(i), "F", rng.randint(0, 3), rng.randint(0, 2), rng.randint(0, 2), False)
            for i in range(40)
        ]
        labels = [rng.choice(["seen", "unseen_frame", "unseen_fe"]) for _ in scores]
        reports = split_report(scores, labels)
        total = reports["All"]
        pooled_tp = sum(reports[l].tp for l in set(labels))
        pooled_fp = sum(reports[l].fp for l in set(labels))
        pooled_fn = sum(reports[l].fn for l in set(labels))
        assert (pooled_tp, pooled_fp, pooled_fn) == (total.tp, total.fp, total.fn)
        # Micro-F1 of pooled counts equals F1 recomputed from the sums.
        p = pooled_tp / (pooled_tp + pooled_fp)
        r = pooled_tp / (pooled_tp + pooled_fn)
        assert total.f1 == pytest.approx(2 * p * r / (p + r))

    def test_misaligned_labels_rejected(self):
        with pytest.raises(ValueError):
            split_report([InstanceScore("a", "F", 1, 0, 0, True)], [])


class TestPerFrameDistribution:
    def test_single_frame_quartiles_collapse(self):
        report = aggregate([InstanceScore("a", "F", 1, 0, 1, False)])
        quartiles = f1_quartiles(report)
        assert len(set(quartiles)) == 1

    def test_median_of_three(self):
        scores = [
            InstanceScore("a", "F", 0, 1, 1, False),
            InstanceScore("b", "G", 1, 1, 1, False),
            InstanceScore("c", "H", 1, 0, 0, True),
        ]
        report = aggregate(scores)
        rows = per_frame_distribution(report)
        assert [f1 for _, _, f1 in rows] == sorted(f1 for _, _, f1 in rows)
        assert f1_quartiles(report)[2] == pytest.approx(0.5)

    def test_perfect_run_has_zero_iqr(self):
        scores = [InstanceScore(str(i), f"F{i}", 1, 0, 0, True) for i in range(9)]
        quartiles = f1_quartiles(aggregate(scores))
        assert quartiles[3] - quartiles[1] == 0.0

    def test_csv_writer(self, tmp_path):
        report = aggregate([InstanceScore("a", "F", 1, 0, 0, True)])
        path = tmp_path / "per_frame.csv"
        write_per_frame_csv(report, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "frame,n,tp,fp,fn,f1"
        assert lines[1].startswith("F,1,1,0,0,")


FIXTURE_ROWS = [
    CorrelationRow("m1", 0.5, 0.470, {"musr": 0.22}),
    CorrelationRow("m2", 3.0, 0.545, {"musr": 0.41}),
    CorrelationRow("m3", 7.0, 0.610, {"musr": 0.52}),
    CorrelationRow("m4", 14.0, 0.655, {"musr": 0.55}),
    CorrelationRow("m5", 72.0, 0.794, {"musr": 0.80}),
]

# Computed with an exact rational normal-equations + Pearson oracle.
FIXTURE_EXPECTED = 0.97001945314432


def oracle_partial_correlation(size, bench, f1):
    """Explicit 2x2 normal equations, independent of the numpy code path."""
    n = len(size)

    def residuals(y):
        sz = sum(size)
        szz = sum(v * v for v in size)
        sy = sum(y)
        szy = sum(a * b for a, b in zip(size, y))
        det = n * szz - sz * sz
        b0 = (szz * sy - sz * szy) / det
        b1 = (n * szy - sz * sy) / det
        return [v - (b0 + b1 * w) for v, w in zip(y, size)]

    rb, rf = residuals(bench), residuals(f1)
    num = sum(a * b for a, b in zip(rb, rf))
    den = (sum(a * a for a in rb) ** 0.5) * (sum(b * b for b in rf) ** 0.5)
    return num / den


class TestPartialCorrelation:
    def test_fixture_matches_frozen_oracle_value(self):
        value = partial_correlation(FIXTURE_ROWS, "musr")
        assert value == pytest.approx(FIXTURE_EXPECTED, abs=1e-9)

    def test_matches_oracle_on_random_tables(self):
        rng = random.Random(11)
        for _ in range(50):
            n = rng.randint(4, 12)
            size = [rng.uniform(0.5, 80) for _ in range(n)]
            bench = [rng.uniform(0, 1) for _ in range(n)]
            f1 = [rng.uniform(0, 1) for _ in range(n)]
            rows = [
                CorrelationRow(f"m{i}", size[i], f1[i], {"bbh": bench[i]}) for i in range(n)
            ]
            value = partial_correlation(rows, "bbh")
            assert value == pytest.approx(oracle_partial_correlation(size, bench, f1), abs=1e-9)

    def test_affine_rescaling_of_size_invariant(self):
        rescaled = [
            CorrelationRow(r.model, 3.7 * r.size_b + 12.1, r.f1, r.benchmarks)
            for r in FIXTURE_ROWS
        ]
        # size must stay positive for validation; 3.7x + 12.1 does.
        assert abs(partial_correlation(rescaled, "musr") - FIXTURE_EXPECTED) < 1e-9

    def test_self_correlation_is_one(self):
        rng = random.Random(2)
        rows = [
            CorrelationRow(f"m{i}", rng.uniform(1, 50), f1, {"gpqa": f1})
            for i, f1 in enumerate([0.2, 0.5, 0.4, 0.9, 0.7])
        ]
        assert partial_correlation(rows, "gpqa") == pytest.approx(1.0, abs=1e-9)

    def test_benchmark_linear_in_size_degenerate(self):
        rows = [
            CorrelationRow(f"m{i}", s, rng_f1, {"ifeval": 2.0 * s + 1.0})
            for i, (s, rng_f1) in enumerate([(1, 0.3), (2, 0.9), (3, 0.4), (4, 0.6)])
        ]
        with pytest.raises(DegenerateVariance):
            partial_correlation(rows, "ifeval")

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            partial_correlation(FIXTURE_ROWS[:3], "musr")

    def test_result_in_unit_interval(self):
        rng = random.Random(7)
        for _ in range(20):
            rows = [
                CorrelationRow(f"m{i}", rng.uniform(1, 9), rng.random(), {"musr": rng.random()})
                for i in range(6)
            ]
            assert -1.0 <= partial_correlation(rows, "musr") <= 1.0

    def test_csv_loading(self, tmp_path):
        path = tmp_path / "models.csv"
        path.write_text(
            "model,size_b,f1,ifeval,bbh,gpqa,musr,mmlu_pro\n"
            "m1,0.5,0.470,0.1,0.2,0.3,0.22,0.5\n"
            "m2,3,0.545,0.2,0.3,0.4,0.41,0.6\n",
            encoding="utf-8",
        )
        rows = load_correlation_csv(path)
        assert rows[0].model == "m1"
        assert rows[0].benchmarks["musr"] == 0.22
        assert rows[1].size_b == 3.0
