"""The eight benchmark method combinations of algorithm and distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..core import Assignment
from ..distances import DtwParams
from .density import DensityPeaksParams, density_peaks_fit, tadpole_fit
from .hierarchical import agglomerative_fit
from .partitional import FitConfig, fuzzy_cmeans_fit, kmeans_fit, kmedoids_fit


@dataclass(frozen=True)
class MethodSpec:
    name: str
    label: str
    distance: str
    deterministic: bool
    # distance matrix the method consumes, if any; lets the harness cache it
    matrix_measure: str | None
    fit: Callable


def _kmeans(measure, strategy):
    def fit(X, k, seed, dtw_params, dp_params, dm):
        return kmeans_fit(X, measure, strategy, FitConfig(k, seed), dtw_params)
    return fit


def _kmedoids(X, k, seed, dtw_params, dp_params, dm):
    return kmedoids_fit(X, "euclidean", FitConfig(k, seed), dtw_params, dm=dm)


def _cmeans(X, k, seed, dtw_params, dp_params, dm):
    return fuzzy_cmeans_fit(X, FitConfig(k, seed))


def _dpeaks_euc(X, k, seed, dtw_params, dp_params, dm):
    return density_peaks_fit(X, "euclidean", dp_params, k, dm=dm)


def _dpeaks_dtw(X, k, seed, dtw_params, dp_params, dm):
    assignment, _ = tadpole_fit(X, dtw_params, dp_params, k)
    return assignment


def _agglo(X, k, seed, dtw_params, dp_params, dm):
    return agglomerative_fit(X, k, "ward")


METHODS = {
    entry.name: entry
    for entry in (
        MethodSpec("kmeans_euc", "K-means-Euc", "euclidean", False, None, _kmeans("euclidean", "arithmetic_mean")),
        MethodSpec("kmedoids_euc", "K-medoids-Euc", "euclidean", False, "euclidean", _kmedoids),
        MethodSpec("cmeans_euc", "C-means-Euc", "euclidean", False, None, _cmeans),
        MethodSpec("kmeans_sbd", "K-means-shape", "sbd", False, None, _kmeans("sbd", "shape_extraction")),
        MethodSpec("kmeans_dtw", "K-means-DTW", "dtw", False, None, _kmeans("dtw", "dba")),
        MethodSpec("dpeaks_euc", "Density-Peaks-Euc", "euclidean", True, "euclidean", _dpeaks_euc),
        MethodSpec("dpeaks_dtw", "Density-Peaks-DTW", "dtw", True, None, _dpeaks_dtw),
        MethodSpec("agglo_euc", "Agglomerative-Euc", "euclidean", True, None, _agglo),
    )
}


def run_method(name: str, data, k: int, seed: int = 0, dtw_params: DtwParams = DtwParams(),
               dp_params: DensityPeaksParams = DensityPeaksParams(), dm=None) -> Assignment:
    """Fit method ``name``; ``dm`` optionally supplies its precomputed distance matrix."""
    try:
        entry = METHODS[name]
    except KeyError:
        raise KeyError(f"unknown method {name!r}; choose from {sorted(METHODS)}") from None
    X = data.X if hasattr(data, "X") else data
    return entry.fit(X, k, seed, dtw_params, dp_params, dm)
