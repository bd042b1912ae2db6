"""Exit criteria for the library, one test per criterion.

Every test records a one-line verdict in ``VERDICTS``; ``conftest.py`` prints
them at the end of the session. Criterion 7 has three parts (7a/7b/7c) that
are reported together.
"""

import csv
import os
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from tsbench.clustering import (
    DensityPeaksParams,
    FitConfig,
    agglomerative_fit,
    cutoff_distance,
    density_peaks_fit,
    fuzzy_cmeans_fit,
    kmeans_fit,
    kmedoids_fit,
    tadpole_fit,
)
from tsbench.core import dataset_paths, load_archive_dataset
from tsbench.distances import DtwParams, distance_matrix, dtw_window, euclidean, lb_keogh
from tsbench.evaluation import TIE_RULES, external_scores, spread
from tsbench.harness import ResultStore, ScoreRecord, phase_report, random_baseline

pytestmark = pytest.mark.acceptance

DATA = Path(__file__).parent / "data"
VERDICTS = {}


def verdict(key, ok, detail):
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'} - {detail}"
    VERDICTS[key] = (ok, line)
    print(line)
    assert ok, line


def skip_verdict(key, reason):
    VERDICTS[key] = (None, f"criterion {key}: SKIP - {reason}")
    pytest.skip(reason)


def summary_lines():
    lines = []
    for key in range(1, 9):
        if key == 7:
            parts = [VERDICTS.get(p, (False, f"criterion {p}: NOT RECORDED")) for p in ("7a", "7b", "7c")]
            ok = all(part[0] for part in parts)
            lines.append(f"criterion 7: {'PASS' if ok else 'FAIL'}")
            lines += ["  " + part[1] for part in parts]
        else:
            lines.append(VERDICTS.get(key, (False, f"criterion {key}: NOT RECORDED"))[1])
    return lines


# ---- 1: index oracles


def test_criterion_1_index_oracles():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst_ari, worst_other = 0.0, 0.0
    for _ in range(500):
        n = int(rng.integers(2, 13))
        x = list(rng.integers(0, int(rng.integers(1, 6)), n))
        y = list(rng.integers(0, int(rng.integers(1, 6)), n))
        s = external_scores(x, y)
        worst_ari = max(worst_ari, abs(s.ari - oracles.ari_pairs(x, y)))
        for got, want in (
            (s.rand, oracles.rand_pairs(x, y)),
            (s.fowlkes_mallows, oracles.fm_pairs(x, y)),
            (s.homogeneity, oracles.homogeneity_def(x, y)),
            (s.completeness, oracles.completeness_def(x, y)),
            (s.ami, oracles.ami_def(x, y)),
        ):
            worst_other = max(worst_other, abs(got - want))
    elapsed = time.perf_counter() - start
    ok = worst_ari <= 1e-12 and worst_other <= 1e-9 and elapsed < 10
    verdict(1, ok, f"max ARI error {worst_ari:.1e}, max other error {worst_other:.1e}, {elapsed:.1f}s")


# ---- 2: chance-level baseline


def test_criterion_2_random_baseline():
    start = time.perf_counter()
    rows = random_baseline(1000, range(2, 11), trials=100, seed=0)
    elapsed = time.perf_counter() - start
    max_ari = max(abs(r["ari"]) for r in rows)
    max_ami = max(abs(r["ami"]) for r in rows)
    rand = [r["rand"] for r in rows]
    rand_range = max(rand) - min(rand)
    ok = max_ari < 0.02 and max_ami < 0.02 and rand_range > 0.1 and elapsed < 60
    verdict(2, ok, f"max |ARI| {max_ari:.4f}, max |AMI| {max_ami:.4f}, Rand range {rand_range:.3f}, {elapsed:.1f}s")


# ---- 3: DTW correctness


def test_criterion_3_dtw():
    start = time.perf_counter()
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        for w in range(n):
            worst = max(worst, abs(dtw_window(a, b, w) - oracles.dtw_enumerate(a, b, w)))
    zero_window_exact = True
    for _ in range(200):
        n = int(rng.integers(1, 50))
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        zero_window_exact &= dtw_window(a, b, 0) == euclidean(a, b)
    lb_violations = 0
    for _ in range(1000):
        n = int(rng.integers(2, 80))
        a, b = np.cumsum(rng.standard_normal((2, n)), axis=1)
        p = DtwParams(float(rng.uniform(0, 0.5)))
        lb_violations += lb_keogh(a, b, p) > dtw_window(a, b, p.window(n))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and zero_window_exact and lb_violations == 0 and elapsed < 30
    verdict(3, ok, f"max enumeration error {worst:.1e}, w=0 equals Euclidean: {zero_window_exact}, "
                   f"LB violations {lb_violations}/1000, {elapsed:.1f}s")


# ---- 4: pruned Density Peaks is exact


def blob_dataset(seed):
    rng = np.random.default_rng(seed)
    n_clusters = int(rng.integers(2, 6))
    n_obs = int(rng.integers(40, 151))
    length = int(rng.integers(24, 65))
    protos = np.cumsum(rng.standard_normal((n_clusters, length)), axis=1)
    labels = rng.integers(0, n_clusters, n_obs)
    X = protos[labels] + rng.uniform(0.1, 0.5) * rng.standard_normal((n_obs, length))
    return X, n_clusters


def test_criterion_4_tadpole_exact():
    start = time.perf_counter()
    p = DtwParams(0.05)
    mismatches, worst_pruned = [], 1.0
    for seed in range(50):
        X, k = blob_dataset(seed)
        D = distance_matrix(X, "dtw", p)
        mode = ("closest_centroid", "higher_density_chain")[seed % 2]
        dp = DensityPeaksParams(d=cutoff_distance(D), assignment_mode=mode)
        reference = density_peaks_fit(X, "dtw", dp, k, dm=D)
        got, stats = tadpole_fit(X, p, dp, k)
        if not np.array_equal(got.cluster_of, reference.cluster_of):
            mismatches.append(seed)
        n = len(X)
        assert stats.total == n * (n - 1) // 2
        worst_pruned = min(worst_pruned, stats.resolved / stats.total)
    elapsed = time.perf_counter() - start
    ok = not mismatches and worst_pruned >= 0.2 and elapsed < 300
    verdict(4, ok, f"{50 - len(mismatches)}/50 identical, min fraction resolved by bounds {worst_pruned:.2f}, "
                   f"{elapsed:.1f}s")


# ---- 5: Ward via Lance-Williams


def test_criterion_5_ward():
    start = time.perf_counter()
    rng = np.random.default_rng(105)
    differ = 0
    for _ in range(100):
        n = int(rng.integers(2, 51))
        X = rng.standard_normal((n, int(rng.integers(1, 20))))
        merges = [(i, j) for i, j, _ in agglomerative_fit(X, 1).metadata["merges"]]
        differ += merges != oracles.naive_ward(X, 1)[0]
    elapsed = time.perf_counter() - start
    verdict(5, differ == 0 and elapsed < 60, f"{100 - differ}/100 merge sequences identical, {elapsed:.1f}s")


# ---- 6: partitional objectives never increase


def partition_dataset(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 5))
    length = int(rng.integers(16, 40))
    protos = np.cumsum(rng.standard_normal((k, length)), axis=1)
    labels = rng.integers(0, k, int(rng.integers(15, 40)))
    return protos[labels] + rng.uniform(0.2, 1.0) * rng.standard_normal((labels.size, length)), k


def test_criterion_6_monotone_objectives():
    fits = {
        "kmeans_euc": lambda X, cfg: kmeans_fit(X, "euclidean", None, cfg),
        "kmeans_dtw": lambda X, cfg: kmeans_fit(X, "dtw", None, cfg),
        "kmeans_sbd": lambda X, cfg: kmeans_fit(X, "sbd", None, cfg),
        "kmedoids_euc": lambda X, cfg: kmedoids_fit(X, "euclidean", cfg),
        "cmeans_euc": lambda X, cfg: fuzzy_cmeans_fit(X, cfg),
    }
    increases, worst_rowsum, n_fits = [], 0.0, 0
    for ds_seed in range(10):
        X, k = partition_dataset(ds_seed)
        for name, fit in fits.items():
            for seed in range(20):
                a = fit(X, FitConfig(k, seed))
                n_fits += 1
                h = np.asarray(a.history)
                if np.any(np.diff(h) > 1e-12 * max(1.0, abs(h[0]))):
                    increases.append((name, ds_seed, seed))
                if a.memberships is not None:
                    worst_rowsum = max(worst_rowsum, np.abs(a.memberships.sum(axis=1) - 1).max())
    ok = not increases and worst_rowsum <= 1e-9
    verdict(6, ok, f"{n_fits} fits, {len(increases)} with an objective increase, "
                   f"max membership row-sum error {worst_rowsum:.1e}")


# ---- 7: reference benchmark table through the report stack


def reference_store():
    with open(DATA / "reference_ari.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    records = [
        ScoreRecord(row["dataset"], method, "ari", float(value), 1, 0)
        for row in rows
        for method, value in row.items()
        if method != "dataset"
    ]
    return ResultStore(records)


def test_criterion_7a_phase1_means():
    start = time.perf_counter()
    ranking = {r["method"]: r["mean"] for r in phase_report(reference_store(), 1)["ranking"]}
    with open(DATA / "reference_summary.csv", newline="") as fh:
        expected = {row["method"]: float(row["mean"]) for row in csv.DictReader(fh)}
    worst = max(abs(ranking[m] - v) for m, v in expected.items())
    elapsed = time.perf_counter() - start
    verdict("7a", worst <= 0.01 + 1e-12 and elapsed < 5, f"mean ARI max deviation {worst:.4f} (tolerance 0.01)")


PHASE2_EXPECTED = {"kmeans_euc": 54, "cmeans_euc": 31, "kmedoids_euc": 18}


def test_criterion_7b_phase2_counts():
    store = reference_store()
    results = {}
    for ties in TIE_RULES:
        counts = phase_report(store, 2, ties=ties)["winning_counts"]
        results[ties] = (counts, max(abs(counts[m] - v) for m, v in PHASE2_EXPECTED.items()))
    ok = any(dev <= 3 for _, dev in results.values())
    detail = "; ".join(
        f"{ties}: ({', '.join(f'{c[m]:g}' for m in PHASE2_EXPECTED)}) off by {dev:g}"
        for ties, (c, dev) in results.items()
    )
    verdict("7b", ok, f"winning counts vs (54, 31, 18) within 3 -> {detail}")


def test_criterion_7c_spreads():
    store = reference_store()
    _, vectors = store.aligned(store.methods())
    with open(DATA / "reference_spread.csv", newline="") as fh:
        rows = [(r["method_a"], r["method_b"], float(r["spread"])) for r in csv.DictReader(fh)]
    deviation = {(a, b): abs(spread(vectors[a], vectors[b]) - expected) for a, b, expected in rows}
    # the phase reports must carry the same values
    for phase in range(2, 7):
        for pair in phase_report(store, phase)["pairwise"]:
            a, b = pair["methods"]
            assert pair["spread"] == spread(vectors[a], vectors[b])
    worst = max(deviation, key=deviation.get)
    verdict("7c", deviation[worst] <= 0.001 + 1e-12,
            f"{len(rows)} spreads, max deviation {deviation[worst]:.4f} at {worst} (tolerance 0.001)")


# ---- 8: deterministic methods on real archive data (optional)

ARCHIVE_DATASETS = ("Coffee", "Beef", "OliveOil", "Wine", "BirdChicken")


def test_criterion_8_archive():
    root = os.environ.get("BENCH_ARCHIVE_DIR")
    if not root or not all(dataset_paths(root, name)[0].is_file() for name in ARCHIVE_DATASETS):
        skip_verdict(8, "set BENCH_ARCHIVE_DIR to a UCR archive containing " + ", ".join(ARCHIVE_DATASETS))
    with open(DATA / "reference_ari.csv", newline="") as fh:
        reference = {row["dataset"]: row for row in csv.DictReader(fh)}
    outcomes = {}
    for policy in ("merged", "train_only", "test_only"):
        data = {name: load_archive_dataset(root, name, policy) for name in ARCHIVE_DATASETS}
        agglo = {n: external_scores(ds.labels, agglomerative_fit(ds.X, ds.k)).ari for n, ds in data.items()}
        for mode in ("closest_centroid", "higher_density_chain"):
            dp = DensityPeaksParams(assignment_mode=mode)
            worst = 0.0
            for n, ds in data.items():
                dpe = external_scores(ds.labels, density_peaks_fit(ds.X, "euclidean", dp, ds.k)).ari
                worst = max(worst, abs(agglo[n] - float(reference[n]["agglo_euc"])),
                            abs(dpe - float(reference[n]["dpeaks_euc"])))
            outcomes[(policy, mode)] = worst
    best = min(outcomes, key=outcomes.get)
    verdict(8, outcomes[best] <= 0.05, f"best setting {best} with max ARI deviation {outcomes[best]:.3f} (tolerance 0.05)")
