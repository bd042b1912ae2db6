"""Phase 1-6 comparison reports over a result store."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

from ..clustering.methods import METHODS
from ..evaluation import spread, winning_counts
from .store import ResultStore, format_value


@dataclass(frozen=True)
class Phase:
    number: int
    title: str
    methods: tuple


PHASES = {
    p.number: p
    for p in (
        Phase(1, "All methods ranked by mean score", tuple(METHODS)),
        Phase(2, "Partitional algorithms with Euclidean distance", ("kmeans_euc", "cmeans_euc", "kmedoids_euc")),
        Phase(3, "Distance measures under K-means", ("kmeans_dtw", "kmeans_sbd", "kmeans_euc")),
        Phase(4, "Algorithm families with Euclidean distance", ("agglo_euc", "kmeans_euc", "dpeaks_euc")),
        Phase(5, "Density Peaks: Euclidean vs DTW", ("dpeaks_euc", "dpeaks_dtw")),
        Phase(6, "Density Peaks DTW vs K-means DTW", ("dpeaks_dtw", "kmeans_dtw")),
    )
}


def _mean_std(values):
    n = len(values)
    mean = math.fsum(values) / n
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)


def phase_report(store: ResultStore, phase: int, measure: str = "ari", threshold: float = 0.05,
                 ties: str = "strict") -> dict:
    """Build the comparison for ``phase`` on datasets scored by all its methods.

    Phase 1 ranks methods by mean score with the population standard
    deviation across datasets. Later phases report winning counts for the
    whole group and for each pair, the pairwise spreads and per-dataset
    scatter data. Raises :class:`MissingMethod` if the store lacks a method.
    """
    if phase not in PHASES:
        raise ValueError(f"phase must be one of {sorted(PHASES)}")
    phase_def = PHASES[phase]
    datasets, vectors = store.aligned(phase_def.methods, measure)
    report = {"phase": phase, "title": phase_def.title, "measure": measure, "methods": list(phase_def.methods),
              "n_datasets": len(datasets)}
    if not datasets:
        report["empty"] = True
        return report
    if phase == 1:
        rows = [{"method": m, "mean": s[0], "std": s[1]} for m, s in ((m, _mean_std(vectors[m])) for m in phase_def.methods)]
        report["ranking"] = sorted(rows, key=lambda r: (-r["mean"], r["method"]))
        return report
    report["threshold"] = threshold
    report["ties"] = ties
    report["winning_counts"] = winning_counts(vectors, threshold, ties)
    pairs = list(itertools.combinations(phase_def.methods, 2))
    report["pairwise"] = [
        {"methods": [a, b], "winning_counts": winning_counts({a: vectors[a], b: vectors[b]}, threshold, ties),
         "spread": spread(vectors[a], vectors[b])}
        for a, b in pairs
    ]
    report["scatter"] = {
        f"{a}__{b}": [[d, x, y] for d, x, y in zip(datasets, vectors[a], vectors[b])] for a, b in pairs
    }
    return report


def _label(method):
    return METHODS[method].label if method in METHODS else method


def render_text(report: dict) -> str:
    lines = [f"Phase {report['phase']}: {report['title']} ({report['measure']}, {report['n_datasets']} datasets)"]
    if report.get("empty"):
        lines.append("  no dataset is scored by every method")
        return "\n".join(lines) + "\n"
    if "ranking" in report:
        for r in report["ranking"]:
            lines.append(f"  {_label(r['method']):<20} {r['mean']:.3f} +/- {r['std']:.3f}")
        return "\n".join(lines) + "\n"
    lines.append(f"  winning counts (score >= {report['threshold']}, ties: {report['ties']})")
    for m, c in report["winning_counts"].items():
        lines.append(f"    {_label(m):<20} {c:g}")
    lines.append("  pairwise")
    for p in report["pairwise"]:
        a, b = p["methods"]
        ca, cb = p["winning_counts"][a], p["winning_counts"][b]
        lines.append(f"    {_label(a)} vs {_label(b)}: {ca:g} vs {cb:g}, spread {p['spread']:.4f}")
    return "\n".join(lines) + "\n"


def write_report(report: dict, directory) -> list:
    """Write ``phase<N>.json``, ``phase<N>.txt`` and one scatter CSV per method pair."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"phase{report['phase']}"
    written = [directory / f"{stem}.json", directory / f"{stem}.txt"]
    written[0].write_text(json.dumps(report, indent=1) + "\n")
    written[1].write_text(render_text(report))
    for pair, rows in report.get("scatter", {}).items():
        a, b = pair.split("__")
        path = directory / f"{stem}_scatter_{pair}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dataset", a, b])
            w.writerows([d, format_value(x), format_value(y)] for d, x, y in rows)
        written.append(path)
    return written
