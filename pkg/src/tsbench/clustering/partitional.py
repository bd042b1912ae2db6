"""K-means (Euclidean, DTW/DBA, SBD/k-Shape), K-medoids and Fuzzy C-means.

All three start from ``k`` distinct dataset members drawn with the run seed
and alternate a centroid step with an assignment step. ``Assignment.history``
holds the clustering objective after every assignment step:

* K-means: sum of squared distances to the assigned centroid
* K-medoids: sum of distances to the assigned medoid
* Fuzzy C-means: sum of ``u ** m * d ** 2``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Assignment
from ..distances import DistanceMatrix, DtwParams, cross_distances, distance_matrix
from ..errors import EmptyClusterRepairFailed, IncompatibleStrategy
from .centroids import COMPATIBLE, CentroidStrategy, arithmetic_mean, dba_centroid, shape_extract


@dataclass(frozen=True)
class FitConfig:
    k: int
    seed: int = 0
    max_iterations: int = 100
    tolerance: float = 1e-6
    fuzzifier: float = 2.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.fuzzifier <= 1.0:
            raise ValueError("fuzzifier must exceed 1")


def _as_matrix(data) -> np.ndarray:
    X = data.X if hasattr(data, "X") else data
    return np.ascontiguousarray(X, dtype=np.float64)


def _initial_indices(n_obs, cfg: FitConfig) -> np.ndarray:
    if cfg.k > n_obs:
        raise ValueError(f"k={cfg.k} exceeds the {n_obs} observations")
    rng = np.random.default_rng(cfg.seed)
    return rng.choice(n_obs, size=cfg.k, replace=False)


def _repair_empty(labels, D, k, centroids, X):
    """Re-seed each empty cluster with the point farthest from its centroid."""
    for c in range(k):
        sizes = np.bincount(labels, minlength=k)
        if sizes[c]:
            continue
        movable = sizes[labels] > 1
        if not movable.any():
            raise EmptyClusterRepairFailed(f"cluster {c} is empty and no point can move")
        far = D[np.arange(len(labels)), labels]
        far = np.where(movable, far, -np.inf)
        i = int(np.argmax(far))
        labels[i] = c
        centroids[c] = X[i]
        D[i, :] = np.inf
        D[i, c] = 0.0
    return labels


def kmeans_fit(data, distance: str = "euclidean", centroid_strategy=None, cfg: FitConfig = None,
               dtw_params: DtwParams = DtwParams()) -> Assignment:
    """Lloyd-style K-means with a pluggable distance and averaging method.

    Valid pairings are (euclidean, arithmetic_mean), (dtw, dba) and
    (sbd, shape_extraction). DBA and shape-extraction updates that would
    raise a cluster's cost are rejected, which keeps the objective
    non-increasing.
    """
    if cfg is None:
        raise TypeError("cfg is required")
    strategy = CentroidStrategy(centroid_strategy or _default_strategy(distance))
    if COMPATIBLE.get(strategy) != distance:
        raise IncompatibleStrategy(f"{strategy.value} cannot average under {distance}")
    X = _as_matrix(data)
    n_obs = X.shape[0]
    k = cfg.k
    centroids = X[_initial_indices(n_obs, cfg)].copy()
    if strategy is CentroidStrategy.SHAPE_EXTRACTION:
        # shape centroids live in z-normalized space
        centroids = np.array([shape_extract(c[None, :], c) for c in centroids])

    labels = None
    history = []
    rejected = 0
    n_iter = 0
    for n_iter in range(1, cfg.max_iterations + 1):
        D = cross_distances(X, centroids, distance, dtw_params)
        new = np.argmin(D, axis=1)
        if k > 1:
            new = _repair_empty(new, D, k, centroids, X)
        history.append(float((D[np.arange(n_obs), new] ** 2).sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            members = X[labels == c]
            if strategy is CentroidStrategy.ARITHMETIC_MEAN:
                centroids[c] = arithmetic_mean(members)
                continue
            if strategy is CentroidStrategy.DBA:
                candidate = dba_centroid(members, centroids[c], dtw_params)
            else:
                candidate = shape_extract(members, centroids[c])
            old_cost = (cross_distances(members, centroids[c][None, :], distance, dtw_params) ** 2).sum()
            new_cost = (cross_distances(members, candidate[None, :], distance, dtw_params) ** 2).sum()
            if new_cost <= old_cost:
                centroids[c] = candidate
            else:
                rejected += 1
    return Assignment(
        labels,
        history=history,
        metadata={"centroids": centroids, "n_iter": n_iter, "rejected_updates": rejected},
    )


def _default_strategy(distance):
    for strategy, measure in COMPATIBLE.items():
        if measure == distance:
            return strategy
    raise ValueError(f"unknown distance {distance!r}")


def kmedoids_fit(data, distance: str = "euclidean", cfg: FitConfig = None,
                 dtw_params: DtwParams = DtwParams(), dm=None) -> Assignment:
    """Alternating K-medoids over a precomputed distance matrix.

    Each medoid is replaced by the cluster member with the smallest total
    distance to the other members; the incumbent is kept on ties.
    """
    if cfg is None:
        raise TypeError("cfg is required")
    if dm is None:
        dm = distance_matrix(data, distance, dtw_params)
    D = dm.values if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=np.float64)
    n_obs = D.shape[0]
    k = cfg.k
    medoids = _initial_indices(n_obs, cfg)
    labels = None
    history = []
    n_iter = 0
    for n_iter in range(1, cfg.max_iterations + 1):
        new = np.argmin(D[:, medoids], axis=1)
        new[medoids] = np.arange(k)
        history.append(float(D[np.arange(n_obs), medoids[new]].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            members = np.flatnonzero(labels == c)
            cost = D[np.ix_(members, members)].sum(axis=1)
            best = members[int(np.argmin(cost))]
            if cost.min() < D[medoids[c], members].sum():
                medoids[c] = best
    return Assignment(labels, history=history, metadata={"medoids": medoids.copy(), "n_iter": n_iter})


def fuzzy_memberships(X, centroids, m: float = 2.0) -> np.ndarray:
    """Standard FCM membership update; a point on a centroid belongs to it fully."""
    D = cross_distances(X, centroids, "euclidean")
    U = np.zeros_like(D)
    on_centroid = D == 0.0
    hit = on_centroid.any(axis=1)
    U[hit, np.argmax(on_centroid[hit], axis=1)] = 1.0
    rest = ~hit
    if rest.any():
        Dr = D[rest]
        # scale by the row minimum so the power cannot overflow
        ratio = Dr / Dr.min(axis=1, keepdims=True)
        inv = ratio ** (-2.0 / (m - 1.0))
        U[rest] = inv / inv.sum(axis=1, keepdims=True)
    return U


def fuzzy_objective(X, centroids, U, m: float = 2.0) -> float:
    D = cross_distances(X, centroids, "euclidean")
    return float(((U ** m) * D ** 2).sum())


def fuzzy_cmeans_fit(data, cfg: FitConfig) -> Assignment:
    X = _as_matrix(data)
    m = cfg.fuzzifier
    centroids = X[_initial_indices(X.shape[0], cfg)].copy()
    U = fuzzy_memberships(X, centroids, m)
    history = [fuzzy_objective(X, centroids, U, m)]
    n_iter = 0
    for n_iter in range(1, cfg.max_iterations + 1):
        W = U ** m
        weight = W.sum(axis=0)
        nz = weight > 0
        centroids[nz] = (W.T @ X)[nz] / weight[nz, None]
        U_new = fuzzy_memberships(X, centroids, m)
        history.append(fuzzy_objective(X, centroids, U_new, m))
        change = np.abs(U_new - U).max()
        U = U_new
        if change < cfg.tolerance:
            break
    return Assignment(
        np.argmax(U, axis=1),
        memberships=U,
        history=history,
        metadata={"centroids": centroids, "n_iter": n_iter},
    )
