"""Sweep of (dataset, method, seed) fits over a UCR-format archive."""

from __future__ import annotations

import hashlib
import json
import logging
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np
import scipy
from filelock import FileLock

from .. import __version__
from ..clustering.density import DensityPeaksParams
from ..clustering.methods import METHODS, run_method
from ..core import filter_admissible, load_archive_dataset, scan_archive
from ..distances import DistanceMatrix, DtwParams, distance_matrix
from ..evaluation import aggregate_runs, external_scores
from .config import BenchmarkConfig
from .store import ResultStore, ScoreRecord, export_scores

log = logging.getLogger("tsbench")


class MatrixCache:
    """On-disk distance matrices keyed by measure, parameters and data content.

    Reads are shared; a per-key file lock makes the compute-and-write step
    exclusive, so concurrent runs never duplicate or tear a matrix.
    """

    def __init__(self, directory):
        self.directory = Path(directory)

    def key(self, X, measure, params: DtwParams) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(X, dtype=np.float64).tobytes())
        h.update(repr((X.shape, measure, params if measure == "dtw" else None)).encode())
        return f"{measure}-{h.hexdigest()[:20]}"

    def get(self, X, measure, params: DtwParams = DtwParams(), n_jobs: int = 1) -> DistanceMatrix:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{self.key(X, measure, params)}.tsdm"
        with FileLock(str(path) + ".lock"):
            if path.is_file():
                return DistanceMatrix.load(path)
            dm = distance_matrix(X, measure, params, n_jobs)
            tmp = path.with_suffix(".tmp")
            dm.save(tmp)
            tmp.replace(path)
            return dm


@dataclass
class RunResult:
    store: ResultStore
    manifest: dict
    output_dir: Path

    @property
    def n_failed(self) -> int:
        return sum(1 for row in self.store.status if row["status"] == "failed")

    @property
    def exit_code(self) -> int:
        return 2 if self.n_failed else 0


def _fit_and_score(name, X, truth, k, seed, dtw_params, dp_params, dm):
    assignment = run_method(name, X, k, seed, dtw_params, dp_params, dm)
    return external_scores(truth, assignment)


def _versions() -> dict:
    return {
        "tsbench": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def run_benchmark(cfg: BenchmarkConfig) -> RunResult:
    """Run every selected method on every admissible dataset and persist the scores.

    Writes ``scores.csv``, ``scores.json``, ``status.csv`` and ``manifest.json``
    to ``cfg.output_dir``. A failing fit marks its (dataset, method) as failed
    and the sweep carries on. Output files depend only on the archive and the
    scientific settings, not on ``cfg.threads``.
    """
    if not cfg.archive_dir.is_dir():
        raise FileNotFoundError(f"archive directory {cfg.archive_dir} does not exist")
    names = scan_archive(cfg.archive_dir)
    if cfg.datasets is not None:
        wanted = set(cfg.datasets)
        absent = sorted(wanted - set(names))
        if absent:
            log.warning("datasets not found in archive: %s", ", ".join(absent))
        names = [n for n in names if n in wanted]
    if not names:
        log.warning("no datasets found under %s", cfg.archive_dir)

    dtw_params = DtwParams(cfg.window_fraction)
    dp_params = DensityPeaksParams(neighbor_fraction=cfg.neighbor_fraction, assignment_mode=cfg.assignment_mode)
    cache = MatrixCache(cfg.cache_path)
    records, status, dataset_info = [], [], {}

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for name in names:
            try:
                ds = load_archive_dataset(cfg.archive_dir, name, cfg.merge_policy)
            except Exception as exc:  # unreadable files are a per-dataset failure
                log.error("%s: failed to load: %s", name, exc)
                dataset_info[name] = {"admissible": False, "reasons": ["load_error"]}
                status += [_status(name, m, "failed", 0, f"load error: {exc}") for m in cfg.methods]
                continue
            check = filter_admissible(ds)
            dataset_info[name] = {"n_obs": len(ds), "length": ds.length if check["admissible"] else None,
                                  "k": ds.k, **check}
            if not check["admissible"]:
                reason = ";".join(check["reasons"])
                log.info("%s: skipped (%s)", name, reason)
                status += [_status(name, m, "skipped", 0, reason) for m in cfg.methods]
                continue
            X, truth, k = ds.X, ds.label_codes(), ds.k
            log.info("%s: n_obs=%d length=%d k=%d", name, len(ds), ds.length, k)

            matrices, matrix_errors = {}, {}
            for measure in sorted({METHODS[m].matrix_measure for m in cfg.methods} - {None}):
                try:
                    matrices[measure] = cache.get(X, measure, dtw_params, cfg.threads)
                except Exception as exc:
                    matrix_errors[measure] = exc

            futures = {}
            for method in cfg.methods:
                entry = METHODS[method]
                if entry.matrix_measure in matrix_errors:
                    continue
                n_runs = 1 if entry.deterministic else cfg.runs
                dm = matrices.get(entry.matrix_measure)
                futures[method] = [
                    pool.submit(_fit_and_score, method, X, truth, k, cfg.base_seed + r, dtw_params, dp_params, dm)
                    for r in range(n_runs)
                ]
            for method in cfg.methods:
                entry = METHODS[method]
                if method not in futures:
                    exc = matrix_errors[entry.matrix_measure]
                    status.append(_status(name, method, "failed", 0, f"distance matrix: {exc}"))
                    continue
                try:
                    runs = [f.result() for f in futures[method]]
                except Exception as exc:
                    log.error("%s/%s failed: %s", name, method, exc)
                    status.append(_status(name, method, "failed", 0, f"{type(exc).__name__}: {exc}"))
                    continue
                mean, _ = aggregate_runs(runs)
                records += [
                    ScoreRecord(name, method, measure, value, len(runs), cfg.base_seed)
                    for measure, value in mean.as_dict().items()
                ]
                status.append(_status(name, method, "ok", len(runs), ""))

    store = ResultStore(records, status)
    out = cfg.output_dir
    store.save(out)
    export_scores(store.records, out / "scores.json", "json")
    manifest = {
        "config": cfg.scientific_dict(),
        "config_hash": cfg.config_hash(),
        "versions": _versions(),
        "datasets": dataset_info,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    (out / ResultStore.MANIFEST).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return RunResult(store, manifest, out)


def _status(dataset, method, state, runs, message):
    return {"dataset": dataset, "method": method, "status": state, "runs": runs, "message": message}

