"""Exact-match scoring of predictions against gold annotations.

A prediction is correct only when both the element name and its text match a
gold annotation; matching treats the entries of an instance as a multiset.
Headline precision/recall/F1 are micro-averaged over summed counts; accuracy
is the fraction of instances reproduced exactly (no misses, no extras). Text
comparison collapses whitespace runs but preserves case, since gold spans are
verbatim corpus text.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from framekit.corpus.types import FrameInstance
from framekit.errors import DegenerateVariance, EmptyScoreList
from framekit.representations import PredictionSet

_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class MatchingPolicy:
    normalize_whitespace: bool = True
    case_fold: bool = False

    def normalize(self, text: str) -> str:
        if self.normalize_whitespace:
            text = _WS_RE.sub(" ", text).strip()
        if self.case_fold:
            text = text.casefold()
        return text

    def as_dict(self) -> dict:
        return {"normalize_whitespace": self.normalize_whitespace, "case_fold": self.case_fold}


DEFAULT_POLICY = MatchingPolicy()


@dataclass(frozen=True)
class InstanceScore:
    sentence_id: str
    frame_name: str
    tp: int
    fp: int
    fn: int
    exact: bool
    warnings: tuple[str, ...] = ()


def score_instance(
    gold: FrameInstance,
    pred: PredictionSet,
    policy: MatchingPolicy = DEFAULT_POLICY,
) -> InstanceScore:
    """Count matched/unmatched (name, text) pairs between gold and prediction.

    With equality as the match criterion, the maximum matching between the
    two multisets is the per-pair minimum of their counts. Predictions naming
    unknown elements stay in the prediction multiset and therefore count as
    false positives.
    """
    gold_counts = Counter((fe.name, policy.normalize(fe.span.text)) for fe in gold.fes)
    pred_counts = Counter((name, policy.normalize(text)) for name, text in pred.entries)
    tp = sum((gold_counts & pred_counts).values())
    fp = sum(pred_counts.values()) - tp
    fn = sum(gold_counts.values()) - tp
    return InstanceScore(
        sentence_id=gold.sentence_id,
        frame_name=gold.frame_name,
        tp=tp,
        fp=fp,
        fn=fn,
        exact=fp == 0 and fn == 0,
        warnings=pred.warning_kinds(),
    )


@dataclass(frozen=True)
class FrameBreakdown:
    n: int
    tp: int
    fp: int
    fn: int
    f1: float


@dataclass(frozen=True)
class EvalReport:
    n_instances: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    per_frame: dict[str, FrameBreakdown] = field(default_factory=dict)
    warnings: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "per_frame": {
                name: {"n": b.n, "tp": b.tp, "fp": b.fp, "fn": b.fn, "f1": b.f1}
                for name, b in sorted(self.per_frame.items())
            },
            "warnings": dict(sorted(self.warnings.items())),
        }


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    # Empty denominators score 0, the conservative convention.
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def aggregate(scores: list[InstanceScore]) -> EvalReport:
    if not scores:
        raise EmptyScoreList("cannot aggregate zero scores")
    tp = sum(s.tp for s in scores)
    fp = sum(s.fp for s in scores)
    fn = sum(s.fn for s in scores)
    precision, recall, f1 = _prf(tp, fp, fn)
    accuracy = sum(1 for s in scores if s.exact) / len(scores)

    frame_counts: dict[str, list[int]] = {}
    for s in scores:
        bucket = frame_counts.setdefault(s.frame_name, [0, 0, 0, 0])
        bucket[0] += 1
        bucket[1] += s.tp
        bucket[2] += s.fp
        bucket[3] += s.fn
    per_frame = {
        name: FrameBreakdown(n, ftp, ffp, ffn, _prf(ftp, ffp, ffn)[2])
        for name, (n, ftp, ffp, ffn) in frame_counts.items()
    }

    warning_counts: Counter[str] = Counter()
    for s in scores:
        warning_counts.update(s.warnings)

    return EvalReport(
        n_instances=len(scores),
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=accuracy,
        per_frame=per_frame,
        warnings=dict(warning_counts),
    )


def split_report(scores: list[InstanceScore], labels: list[str]) -> dict[str, EvalReport]:
    """One report per label plus "All"; pooled counts equal the All counts."""
    if len(scores) != len(labels):
        raise ValueError("scores and labels must align")
    reports = {"All": aggregate(scores)}
    by_label: dict[str, list[InstanceScore]] = {}
    for score, label in zip(scores, labels):
        by_label.setdefault(label, []).append(score)
    for label, group in sorted(by_label.items()):
        reports[label] = aggregate(group)
    return reports


def per_frame_distribution(report: EvalReport) -> list[tuple[str, int, float]]:
    """(frame, n, f1) rows sorted by f1 then name, for box-plot style summaries."""
    rows = [(name, b.n, b.f1) for name, b in report.per_frame.items()]
    rows.sort(key=lambda row: (row[2], row[0]))
    return rows


def f1_quartiles(report: EvalReport) -> tuple[float, float, float, float, float]:
    values = np.array([b.f1 for b in report.per_frame.values()], dtype=float)
    if values.size == 0:
        raise EmptyScoreList("no per-frame scores")
    q = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
    return tuple(float(v) for v in q)  # type: ignore[return-value]


def write_per_frame_csv(report: EvalReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["frame", "n", "tp", "fp", "fn", "f1"])
        for name, n, f1 in per_frame_distribution(report):
            b = report.per_frame[name]
            writer.writerow([name, n, b.tp, b.fp, b.fn, f"{f1:.6f}"])


# --- benchmark partial correlation ---------------------------------------------

BENCHMARK_COLUMNS = ("ifeval", "bbh", "gpqa", "musr", "mmlu_pro")


@dataclass(frozen=True)
class CorrelationRow:
    model: str
    size_b: float
    f1: float
    benchmarks: dict[str, float]


def load_correlation_csv(path: str | Path) -> list[CorrelationRow]:
    """CSV columns: model,size_b,f1,ifeval,bbh,gpqa,musr,mmlu_pro."""
    rows = []
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        for record in csv.DictReader(handle):
            rows.append(
                CorrelationRow(
                    model=record["model"],
                    size_b=float(record["size_b"]),
                    f1=float(record["f1"]),
                    benchmarks={
                        column: float(record[column])
                        for column in BENCHMARK_COLUMNS
                        if record.get(column) not in (None, "")
                    },
                )
            )
    return rows


def partial_correlation(rows: list[CorrelationRow], benchmark: str) -> float:
    """Correlation between a benchmark and F1 with model size partialed out.

    Both variables are regressed on size (with intercept) by least squares
    and the Pearson correlation of the residuals is returned.
    """
    usable = [row for row in rows if benchmark in row.benchmarks]
    if len(usable) < 4:
        raise ValueError(f"need at least 4 rows with a {benchmark!r} score, got {len(usable)}")
    if any(row.size_b <= 0 for row in usable):
        raise ValueError("model sizes must be positive")
    size = np.array([row.size_b for row in usable], dtype=float)
    bench = np.array([row.benchmarks[benchmark] for row in usable], dtype=float)
    f1 = np.array([row.f1 for row in usable], dtype=float)

    design = np.column_stack([np.ones_like(size), size])
    bench_resid = bench - design @ np.linalg.lstsq(design, bench, rcond=None)[0]
    f1_resid = f1 - design @ np.linalg.lstsq(design, f1, rcond=None)[0]

    bench_scale = float(np.sqrt(np.sum(bench_resid**2)))
    f1_scale = float(np.sqrt(np.sum(f1_resid**2)))
    threshold = 1e-12 * max(1.0, float(np.max(np.abs(bench))), float(np.max(np.abs(f1))))
    if bench_scale <= threshold or f1_scale <= threshold:
        raise DegenerateVariance(
            f"residual variance vanished for {benchmark!r}; partial correlation undefined"
        )
    return float(np.dot(bench_resid, f1_resid) / (bench_scale * f1_scale))


def report_bundle_json(bundle: dict) -> str:
    """Deterministic serialization for report files."""
    return json.dumps(bundle, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
