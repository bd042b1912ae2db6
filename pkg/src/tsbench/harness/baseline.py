"""Scores of uniformly random partitions, showing which indices correct for chance."""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from ..evaluation import MEASURES, external_scores
from .store import format_value


def random_baseline(n_points: int = 1000, k_range=range(2, 11), trials: int = 100, seed: int = 0,
                    truth_k: int | None = None) -> list:
    """Mean of every index over ``trials`` random (truth, prediction) pairs per ``k``.

    Both labelings are drawn uniformly from ``k`` clusters unless ``truth_k``
    fixes the number of true classes. Returns one dict per ``k`` with the
    keys ``k`` and each measure name.
    """
    ks = list(k_range)
    if any(not 2 <= k <= n_points for k in ks):
        raise ValueError(f"every k must lie in [2, {n_points}]")
    rng = np.random.default_rng(seed)
    rows = []
    for k in ks:
        totals = {m: [] for m in MEASURES}
        for _ in range(trials):
            truth = rng.integers(0, truth_k or k, n_points)
            pred = rng.integers(0, k, n_points)
            for m, v in external_scores(truth, pred).as_dict().items():
                totals[m].append(v)
        rows.append({"k": k, **{m: math.fsum(v) / trials for m, v in totals.items()}})
    return rows


def baseline_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", *MEASURES])
    for r in rows:
        w.writerow([r["k"], *(format_value(r[m]) for m in MEASURES)])
    return buf.getvalue()
