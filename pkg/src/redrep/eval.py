"""Token-level scoring, multi-run aggregation and Fleiss' kappa."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .corpus import LABELS, NUM_LABELS, Label
from .errors import DegenerateAgreement, RunFailed, ShapeMismatch

SCORED = (Label.REDUP, Label.REP, Label.OTHER)
_PREFIX = {Label.REDUP: "redup", Label.REP: "rep", Label.OTHER: "other"}


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts indexed ``[gold, predicted]`` in ``LABELS`` order."""

    counts: np.ndarray

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    def __getitem__(self, key: tuple[Label, Label]) -> int:
        gold, pred = key
        return int(self.counts[gold.index, pred.index])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


def build_confusion(gold: Sequence[Sequence[Label]], pred: Sequence[Sequence[Label]]) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise ShapeMismatch(f"{len(gold)} gold sequences vs {len(pred)} predicted")
    counts = np.zeros((NUM_LABELS, NUM_LABELS), dtype=np.int64)
    for k, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise ShapeMismatch(f"sequence {k}: {len(g)} gold labels vs {len(p)} predicted")
        for a, b in zip(g, p):
            counts[a.index, b.index] += 1
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int = 0
    zero_division: bool = False


def _ratio(num: int, den: int) -> tuple[float, bool]:
    return (num / den, False) if den else (0.0, True)


@dataclass(frozen=True)
class EvalReport:
    per_class: dict
    macro_precision: float
    macro_recall: float
    macro_f1: float
    tokens: int
    o_support: int = 0
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        d = {}
        for lab in SCORED:
            m = self.per_class[lab]
            p = _PREFIX[lab]
            d[f"{p}_p"] = m.precision
            d[f"{p}_r"] = m.recall
            d[f"{p}_f1"] = m.f1
        d["macro_f1"] = self.macro_f1
        d["macro_p"] = self.macro_precision
        d["macro_r"] = self.macro_recall
        d["tokens"] = self.tokens
        d["runs"] = 1
        d["macro_f1_std"] = 0.0
        return d


def compute_metrics(matrix: ConfusionMatrix) -> EvalReport:
    """Per-class P/R/F1 for the three scored classes and their unweighted
    mean. A zero denominator yields 0 and a note, never NaN."""
    c = matrix.counts
    per_class = {}
    notes = []
    for lab in SCORED:
        k = lab.index
        tp = int(c[k, k])
        precision, zp = _ratio(tp, int(c[:, k].sum()))
        recall, zr = _ratio(tp, int(c[k, :].sum()))
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        if zp or zr:
            notes.append(f"{lab.value}: zero division in {'precision' if zp else ''}{' and ' if zp and zr else ''}{'recall' if zr else ''}")
        per_class[lab] = ClassMetrics(precision, recall, f1, int(c[k, :].sum()), zp or zr)
    n = len(SCORED)
    return EvalReport(
        per_class=per_class,
        macro_precision=sum(m.precision for m in per_class.values()) / n,
        macro_recall=sum(m.recall for m in per_class.values()) / n,
        macro_f1=sum(m.f1 for m in per_class.values()) / n,
        tokens=matrix.total,
        o_support=int(c[Label.O.index, :].sum()),
        notes=tuple(notes),
    )


def evaluate(gold, pred) -> EvalReport:
    return compute_metrics(build_confusion(gold, pred))


def format_report(report: EvalReport) -> str:
    rows = [f"{'class':<14}{'P':>8}{'R':>8}{'F1':>8}{'support':>9}"]
    for lab in SCORED:
        m = report.per_class[lab]
        rows.append(f"{lab.value:<14}{m.precision:8.4f}{m.recall:8.4f}{m.f1:8.4f}{m.support:9d}")
    rows.append(f"{'macro':<14}{report.macro_precision:8.4f}{report.macro_recall:8.4f}{report.macro_f1:8.4f}{report.tokens:9d}")
    return "\n".join(rows)


# ---------------------------------------------------------------------------
# Multi-run aggregation

METRIC_KEYS = (
    "redup_p", "redup_r", "redup_f1",
    "rep_p", "rep_r", "rep_f1",
    "other_p", "other_r", "other_f1",
    "macro_p", "macro_r", "macro_f1",
)


@dataclass(frozen=True)
class RunSummary:
    reports: tuple[EvalReport, ...]
    seeds: tuple[int, ...]
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {k: self.mean[k] for k in METRIC_KEYS}
        d["runs"] = len(self.reports)
        d["macro_f1_std"] = self.std["macro_f1"]
        d["std"] = {k: self.std[k] for k in METRIC_KEYS}
        d["seeds"] = list(self.seeds)
        d["per_run"] = [r.to_json() for r in self.reports]
        return d


def summarize(reports: Sequence[EvalReport], seeds: Sequence[int]) -> RunSummary:
    flat = [r.to_json() for r in reports]
    mean, std = {}, {}
    for k in METRIC_KEYS:
        vals = [f[k] for f in flat]
        mean[k] = math.fsum(vals) / len(vals)
        std[k] = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
    return RunSummary(tuple(reports), tuple(seeds), mean, std)


def multi_run(experiment: Callable[[int], EvalReport], runs: int = 5, base_seed: int = 0) -> RunSummary:
    """Call ``experiment(seed)`` for seeds ``base_seed .. base_seed+runs-1``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    seeds = [base_seed + k for k in range(runs)]
    reports = []
    for k, seed in enumerate(seeds):
        try:
            reports.append(experiment(seed))
        except Exception as exc:
            raise RunFailed(k, seed, exc) from exc
    return summarize(reports, seeds)


# ---------------------------------------------------------------------------
# Agreement


def fleiss_kappa(table) -> float:
    """Fleiss' kappa for an ``items x categories`` table of rating counts,
    every row summing to the same number of raters ``n >= 2``."""
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] < 1:
        raise ValueError("agreement table must be 2-D with at least one item")
    if not np.issubdtype(t.dtype, np.integer):
        if not np.all(t == np.round(t)):
            raise ValueError("agreement table must hold integer counts")
        t = t.astype(np.int64)
    if (t < 0).any():
        raise ValueError("rating counts must be non-negative")
    raters = t.sum(axis=1)
    n = int(raters[0])
    if n < 2 or (raters != n).any():
        raise ValueError("every item needs the same number of raters, at least 2")
    N = t.shape[0]
    p_item = (np.sum(t * t, axis=1) - n) / (n * (n - 1))
    p_bar = float(np.mean(p_item))
    p_cat = t.sum(axis=0) / (N * n)
    p_e = float(np.sum(p_cat**2))
    if p_e == 1.0:
        raise DegenerateAgreement("all ratings fall in one category; kappa is undefined")
    return (p_bar - p_e) / (1.0 - p_e)


def agreement_table(annotations: Sequence[Sequence[Label]], categories: Sequence[Label] = LABELS) -> np.ndarray:
    """Build a rating-count table from per-annotator label sequences over the
    same tokens."""
    lengths = {len(a) for a in annotations}
    if len(lengths) != 1:
        raise ShapeMismatch("annotators labeled different numbers of tokens")
    col = {lab: j for j, lab in enumerate(categories)}
    table = np.zeros((lengths.pop(), len(categories)), dtype=np.int64)
    for ann in annotations:
        for i, lab in enumerate(ann):
            table[i, col[lab]] += 1
    return table
