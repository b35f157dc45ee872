"""Evaluation statistics: easiness, correlations, agreement, corpus counts.

The correlation helpers are written out longhand rather than delegated to a
stats library because their tie handling and exact-test conventions are
part of this package's contract:

* ``spearman`` is exactly the Pearson correlation of average ranks.
* ``wilcoxon_signed_rank`` drops zero differences, ranks the absolute
  values with average ranks, reports W = min(W+, W-), and computes the
  two-sided p exactly by enumerating all sign assignments up to n = 12
  (normal approximation with tie correction above that).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    AllZeroDifferences,
    DegenerateInput,
    EmptyDataset,
    LengthMismatch,
    NoGoldUnits,
)
from .extract import ContentUnit
from .text import rouge1_f1, split_sentences, tokenize

WILCOXON_EXACT_LIMIT = 12


# ---------------------------------------------------------------------------
# Easiness


@dataclass(frozen=True)
class EasinessReport:
    """Best-match unigram-F1 agreement between gold units and approximations.

    ``easiness_r`` averages, over gold units, the best F1 any approximation
    reaches against them; ``easiness_p`` runs the other direction. The
    ``degenerate`` flag marks an empty approximation set, reported as 0.0.
    """

    easiness_r: float
    easiness_p: float
    gold_best_match: tuple[int, ...]
    approx_best_match: tuple[int, ...]
    degenerate: bool = False


def easiness(
    gold: Sequence[ContentUnit], approx: Sequence[ContentUnit]
) -> EasinessReport:
    if not gold:
        raise NoGoldUnits("easiness needs at least one gold unit")
    if not approx:
        return EasinessReport(0.0, 0.0, (), (), degenerate=True)
    gold_texts = [u.text for u in gold]
    approx_texts = [u.text for u in approx]
    scores = [[rouge1_f1(g, a) for a in approx_texts] for g in gold_texts]

    gold_best = tuple(max(range(len(approx_texts)), key=row.__getitem__) for row in scores)
    approx_best = tuple(
        max(range(len(gold_texts)), key=lambda j: scores[j][m])
        for m in range(len(approx_texts))
    )
    easiness_r = math.fsum(max(row) for row in scores) / len(gold_texts)
    easiness_p = math.fsum(
        max(scores[j][m] for j in range(len(gold_texts)))
        for m in range(len(approx_texts))
    ) / len(approx_texts)
    return EasinessReport(easiness_r, easiness_p, gold_best, approx_best)


# ---------------------------------------------------------------------------
# Correlations


def _paired(x: Sequence[float], y: Sequence[float]) -> int:
    if len(x) != len(y):
        raise LengthMismatch(f"inputs have lengths {len(x)} and {len(y)}")
    return len(x)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation; raises on constant input."""
    n = _paired(x, y)
    if n < 2:
        raise DegenerateInput("correlation needs at least two points")
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("constant input has no correlation")
    value = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, value))


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their rank positions."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j + 2) / 2  # mean of 1-based positions i+1 .. j+1
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks."""
    _paired(x, y)
    return pearson(average_ranks(x), average_ranks(y))


_CORRELATIONS = {"pearson": pearson, "spearman": spearman}


@dataclass(frozen=True)
class CorrelationReport:
    """One correlation cell of the meta-evaluation."""

    level: str
    kind: str
    value: float
    examples: int
    systems: int
    skipped: int = 0


def _check_matrices(metric: Sequence[Sequence[float]], human: Sequence[Sequence[float]]):
    if len(metric) != len(human):
        raise LengthMismatch(
            f"metric has {len(metric)} examples, human has {len(human)}"
        )
    if not metric:
        raise LengthMismatch("need at least one example row")
    width = len(metric[0])
    for row in list(metric) + list(human):
        if len(row) != width:
            raise LengthMismatch("matrix rows have uneven lengths")
    if width < 2:
        raise LengthMismatch("need at least two systems")
    return len(metric), width


def system_level(
    metric: Sequence[Sequence[float]],
    human: Sequence[Sequence[float]],
    kind: str = "pearson",
) -> CorrelationReport:
    """Correlate per-system means of metric and human scores.

    Rows are examples, columns are systems; both matrices must be fully
    populated and of equal shape.
    """
    if kind not in _CORRELATIONS:
        raise ValueError(f"unknown correlation kind {kind!r}")
    n, s = _check_matrices(metric, human)
    metric_means = [math.fsum(row[j] for row in metric) / n for j in range(s)]
    human_means = [math.fsum(row[j] for row in human) / n for j in range(s)]
    value = _CORRELATIONS[kind](metric_means, human_means)
    return CorrelationReport("system", kind, value, examples=n, systems=s)


def summary_level(
    metric: Sequence[Sequence[float]],
    human: Sequence[Sequence[float]],
    kind: str = "pearson",
) -> CorrelationReport:
    """Mean over examples of the per-example correlation across systems.

    Examples whose metric or human row is constant cannot be correlated;
    they are skipped and counted in the report.
    """
    if kind not in _CORRELATIONS:
        raise ValueError(f"unknown correlation kind {kind!r}")
    n, s = _check_matrices(metric, human)
    values = []
    skipped = 0
    for metric_row, human_row in zip(metric, human):
        if min(metric_row) == max(metric_row) or min(human_row) == max(human_row):
            skipped += 1
            continue
        values.append(_CORRELATIONS[kind](metric_row, human_row))
    if not values:
        raise DegenerateInput("every example row is constant")
    value = math.fsum(values) / len(values)
    return CorrelationReport("summary", kind, value, examples=n, systems=s, skipped=skipped)


# ---------------------------------------------------------------------------
# Agreement and significance


def cohen_kappa(a: Sequence, b: Sequence) -> float:
    """Cohen's kappa for two label sequences over a shared label set."""
    if len(a) != len(b):
        raise LengthMismatch(f"label lists have lengths {len(a)} and {len(b)}")
    if not a:
        raise LengthMismatch("label lists are empty")
    n = len(a)
    observed = sum(1 for u, v in zip(a, b) if u == v) / n
    labels = set(a) | set(b)
    expected = 0.0
    for label in labels:
        pa = sum(1 for v in a if v == label) / n
        pb = sum(1 for v in b if v == label) / n
        expected += pa * pb
    if expected == 1.0:
        return 1.0
    return (observed - expected) / (1.0 - expected)


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Returns ``(W, p)`` with W = min(W+, W-). Zero differences are dropped
    first; if nothing remains, :class:`AllZeroDifferences` is raised. For
    n <= 12 the p-value enumerates all 2^n sign assignments exactly; for
    larger n a normal approximation with tie correction is used.
    """
    if len(x) != len(y):
        raise LengthMismatch(f"inputs have lengths {len(x)} and {len(y)}")
    diffs = [a - b for a, b in zip(x, y) if a - b != 0]
    n = len(diffs)
    if n == 0:
        raise AllZeroDifferences("all paired differences are zero")
    ranks = average_ranks([abs(d) for d in diffs])
    w_plus = math.fsum(r for d, r in zip(diffs, ranks) if d > 0)
    w_minus = math.fsum(r for d, r in zip(diffs, ranks) if d < 0)
    statistic = min(w_plus, w_minus)

    if n <= WILCOXON_EXACT_LIMIT:
        # doubled ranks are integers even with ties, so the enumeration
        # compares exactly
        doubled = [round(2 * r) for r in ranks]
        total = sum(doubled)
        observed = round(2 * statistic)
        hits = 0
        for mask in range(1 << n):
            positive = 0
            for i in range(n):
                if mask >> i & 1:
                    positive += doubled[i]
            if min(positive, total - positive) <= observed:
                hits += 1
        p = hits / (1 << n)
    else:
        mean = n * (n + 1) / 4.0
        variance = n * (n + 1) * (2 * n + 1) / 24.0
        counts: dict[float, int] = {}
        for d in diffs:
            counts[abs(d)] = counts.get(abs(d), 0) + 1
        variance -= math.fsum(t**3 - t for t in counts.values()) / 48.0
        if variance <= 0:
            raise DegenerateInput("tie correction removed all variance")
        z = (statistic - mean) / math.sqrt(variance)
        p = min(1.0, 2.0 * _normal_cdf(z))
    return statistic, p


# ---------------------------------------------------------------------------
# Corpus statistics


@dataclass(frozen=True)
class CorpusStats:
    """Reference-summary statistics over a dataset."""

    avg_sentences: float
    avg_words: float
    avg_words_per_sentence: float
    refs_per_example: float
    avg_scus: float
    examples: int


def corpus_stats(dataset) -> CorpusStats:
    """Token and sentence averages per reference, unit counts per example."""
    entries = list(dataset)
    if not entries:
        raise EmptyDataset("dataset has no entries")
    references = 0
    sentences = 0
    words = 0
    scus = 0
    for entry in entries:
        for reference in entry.references:
            references += 1
            sentences += len(split_sentences(reference.text))
            words += len(tokenize(reference.text))
            scus += len(reference.scus)
    return CorpusStats(
        avg_sentences=sentences / references,
        avg_words=words / references,
        avg_words_per_sentence=words / sentences if sentences else 0.0,
        refs_per_example=references / len(entries),
        avg_scus=scus / len(entries),
        examples=len(entries),
    )
