"""External validity indices, spread, winning counts and run aggregation.

Entropies use the natural log. Comparisons of two identical trivial
partitions (a single cluster on both sides, or all singletons) score 1.0.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import LengthMismatch

MEASURES = ("ari", "rand", "ami", "fowlkes_mallows", "homogeneity", "completeness")


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def b(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ScoreSet:
    ari: float
    rand: float
    ami: float
    fowlkes_mallows: float
    homogeneity: float
    completeness: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _labels(x) -> np.ndarray:
    x = getattr(x, "cluster_of", x)
    return np.asarray(x)


def contingency(x, y) -> ContingencyTable:
    """Rows are the clusters of ``x``, columns the clusters of ``y``."""
    x, y = _labels(x), _labels(y)
    if x.shape != y.shape:
        raise LengthMismatch(f"partitions of size {x.size} and {y.size}")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    counts = np.zeros((xi.max(initial=-1) + 1, yi.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(counts, (xi, yi), 1)
    return ContingencyTable(counts)


def _comb2(v):
    v = np.asarray(v, dtype=np.int64)
    return (v * (v - 1) // 2).sum()


def _pair_counts(ct: ContingencyTable):
    """(same-in-both, same-in-x, same-in-y, total) pair counts, as Python ints."""
    return int(_comb2(ct.counts)), int(_comb2(ct.a)), int(_comb2(ct.b)), ct.n * (ct.n - 1) // 2


def ari(ct: ContingencyTable) -> float:
    index, sum_a, sum_b, total = _pair_counts(ct)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        return 1.0
    return (index - expected) / (maximum - expected)


def rand_index(ct: ContingencyTable) -> float:
    index, sum_a, sum_b, total = _pair_counts(ct)
    if total == 0:
        return 1.0
    disagree = (sum_a - index) + (sum_b - index)
    return (total - disagree) / total


def fowlkes_mallows(ct: ContingencyTable) -> float:
    tp, sum_a, sum_b, _ = _pair_counts(ct)
    if sum_a == 0 and sum_b == 0:
        return 1.0
    if tp == 0:
        return 0.0
    return tp / math.sqrt(sum_a) / math.sqrt(sum_b)


def _entropy(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(-(p * np.log(p)).sum())


def mutual_information(ct: ContingencyTable) -> float:
    n = ct.n
    nz = ct.counts > 0
    nij = ct.counts[nz].astype(np.float64)
    outer = np.outer(ct.a, ct.b)[nz].astype(np.float64)
    return float(max(0.0, (nij / n * (np.log(n * nij) - np.log(outer))).sum()))


def expected_mutual_information(ct: ContingencyTable) -> float:
    """E[MI] when both marginals are held fixed (hypergeometric model)."""
    n = ct.n
    a, b = ct.a, ct.b
    log_fact_n = gammaln(n + 1)
    total = 0.0
    for ai in a:
        for bj in b:
            lo, hi = max(1, ai + bj - n), min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            term = nij / n * (np.log(n) + np.log(nij) - np.log(ai) - np.log(bj))
            log_p = (
                gammaln(ai + 1) + gammaln(bj + 1) + gammaln(n - ai + 1) + gammaln(n - bj + 1)
                - log_fact_n - gammaln(nij + 1) - gammaln(ai - nij + 1)
                - gammaln(bj - nij + 1) - gammaln(n - ai - bj + nij + 1)
            )
            total += float((term * np.exp(log_p)).sum())
    return total


def adjusted_mutual_info(ct: ContingencyTable) -> float:
    h_x, h_y = _entropy(ct.a), _entropy(ct.b)
    if h_x == 0 and h_y == 0:
        return 1.0
    mi = mutual_information(ct)
    emi = expected_mutual_information(ct)
    denom = (h_x + h_y) / 2 - emi
    if abs(denom) < 1e-15:
        # both partitions all singletons: mi == emi == log n
        return 1.0
    return (mi - emi) / denom


def _conditional_entropy(counts) -> float:
    """H(rows | columns)."""
    n = counts.sum()
    col = counts.sum(axis=0)
    nz = counts > 0
    nij = counts[nz].astype(np.float64)
    cj = np.broadcast_to(col, counts.shape)[nz].astype(np.float64)
    return float(-(nij / n * np.log(nij / cj)).sum())


def homogeneity(truth, pred) -> float:
    """Each predicted cluster holds members of a single class."""
    counts = contingency(truth, pred).counts
    h = _entropy(counts.sum(axis=1))
    if h == 0:
        return 1.0
    return max(0.0, 1.0 - _conditional_entropy(counts) / h)


def completeness(truth, pred) -> float:
    return homogeneity(pred, truth)


def external_scores(truth, pred) -> ScoreSet:
    ct = contingency(truth, pred)
    counts = ct.counts
    h_truth = _entropy(ct.a)
    h_pred = _entropy(ct.b)
    hom = 1.0 if h_truth == 0 else max(0.0, 1.0 - _conditional_entropy(counts) / h_truth)
    com = 1.0 if h_pred == 0 else max(0.0, 1.0 - _conditional_entropy(counts.T) / h_pred)
    return ScoreSet(
        ari=ari(ct),
        rand=rand_index(ct),
        ami=adjusted_mutual_info(ct),
        fowlkes_mallows=fowlkes_mallows(ct),
        homogeneity=hom,
        completeness=com,
    )


def spread(a1: Sequence[float], a2: Sequence[float]) -> float:
    """Mean squared difference of two aligned per-dataset score vectors."""
    a1 = np.asarray(a1, dtype=np.float64)
    a2 = np.asarray(a2, dtype=np.float64)
    if a1.shape != a2.shape:
        raise LengthMismatch(f"{a1.size} vs {a2.size} datasets")
    if a1.size == 0:
        raise ValueError("spread needs at least one dataset")
    return float(((a1 - a2) ** 2).sum() / a1.size)


TIE_RULES = ("strict", "shared", "fractional")


def winning_counts(vectors: Mapping[str, Sequence[float]], threshold: float = 0.05, ties: str = "strict") -> dict:
    """Count the datasets on which each method has the highest score.

    A dataset is skipped when its best score is below ``threshold``. With
    ``ties="strict"`` tied maxima award nothing, ``"shared"`` credits every
    tied method and ``"fractional"`` splits one win evenly among them.
    """
    if ties not in TIE_RULES:
        raise ValueError(f"unknown tie rule {ties!r}")
    names = list(vectors)
    M = np.array([np.asarray(vectors[m], dtype=np.float64) for m in names])
    counts = {m: 0 if ties != "fractional" else 0.0 for m in names}
    if M.size == 0:
        return counts
    for column in M.T:
        best = column.max()
        if best < threshold:
            continue
        winners = [names[i] for i in np.flatnonzero(column == best)]
        if len(winners) == 1:
            counts[winners[0]] += 1
        elif ties == "shared":
            for m in winners:
                counts[m] += 1
        elif ties == "fractional":
            for m in winners:
                counts[m] += 1 / len(winners)
    return counts


def aggregate_runs(scores: Sequence[ScoreSet]):
    """Per-measure mean and population standard deviation over runs."""
    if not scores:
        raise ValueError("no runs to aggregate")
    M = np.array([astuple(s) for s in scores], dtype=np.float64)
    n = len(scores)
    # fsum keeps the mean of identical runs equal to the run value
    means = [math.fsum(col) / n for col in M.T]
    stds = [math.sqrt(math.fsum((col - mu) ** 2) / n) for col, mu in zip(M.T, means)]
    return ScoreSet(*means), ScoreSet(*stds)
