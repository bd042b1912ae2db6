"""Agglomerative clustering with Lance-Williams dissimilarity updates.

Cluster ids start as observation indices; a merge of ``i < j`` keeps ``i``.
The Ward dissimilarity between clusters ``A`` and ``B`` is the increase in
within-cluster sum of squares caused by merging them,
``|A||B| / (|A|+|B|) * ||mean(A) - mean(B)||**2``.
"""

from __future__ import annotations

import numba as nb
import numpy as np

from ..core import Assignment

LINKAGES = ("ward", "complete")
_WARD, _COMPLETE = 0, 1


@nb.njit(nogil=True, cache=True)
def _row_min(Dl, active, i, n_obs):
    best, arg = np.inf, -1
    for j in range(i + 1, n_obs):
        if active[j] and Dl[i, j] < best:
            best, arg = Dl[i, j], j
    return best, arg


@nb.njit(nogil=True, cache=True)
def _agglomerate(Dl, n_stop, linkage):
    """Merge until ``n_stop`` clusters remain; returns (i, j, cost) per merge.

    ``Dl`` holds the initial dissimilarities and is overwritten. Each row
    caches its minimum over later columns, so a step costs O(n_obs).
    """
    n_obs = Dl.shape[0]
    active = np.ones(n_obs, dtype=np.bool_)
    size = np.ones(n_obs)
    row_best = np.full(n_obs, np.inf)
    row_arg = np.full(n_obs, -1, dtype=np.int64)
    for i in range(n_obs):
        row_best[i], row_arg[i] = _row_min(Dl, active, i, n_obs)
    n_steps = n_obs - n_stop
    merges = np.empty((n_steps, 2), dtype=np.int64)
    costs = np.empty(n_steps)
    for step in range(n_steps):
        # smallest value, then smallest row; the row cache already holds its smallest column
        i, best = -1, np.inf
        for r in range(n_obs):
            if active[r] and row_arg[r] >= 0 and row_best[r] < best:
                best, i = row_best[r], r
        j = row_arg[i]
        merges[step, 0], merges[step, 1] = i, j
        costs[step] = best
        dij = Dl[i, j]
        si, sj = size[i], size[j]
        active[j] = False
        for l in range(n_obs):
            if not active[l] or l == i:
                continue
            dil, djl = Dl[i, l], Dl[j, l]
            if linkage == _WARD:
                sl = size[l]
                v = ((si + sl) * dil + (sj + sl) * djl - sl * dij) / (si + sj + sl)
            else:
                v = dil if dil > djl else djl
            Dl[i, l] = v
            Dl[l, i] = v
        size[i] = si + sj
        row_best[i], row_arg[i] = _row_min(Dl, active, i, n_obs)
        for l in range(i):
            if not active[l]:
                continue
            if row_arg[l] == i or row_arg[l] == j:
                row_best[l], row_arg[l] = _row_min(Dl, active, l, n_obs)
            elif Dl[l, i] < row_best[l] or (Dl[l, i] == row_best[l] and i < row_arg[l]):
                row_best[l], row_arg[l] = Dl[l, i], i
        for l in range(i + 1, j):
            if active[l] and row_arg[l] == j:
                row_best[l], row_arg[l] = _row_min(Dl, active, l, n_obs)
    return merges, costs


def _exact_sqdist(X):
    n_obs = X.shape[0]
    out = np.zeros((n_obs, n_obs))
    for i in range(n_obs):
        diff = X[i + 1:] - X[i]
        out[i, i + 1:] = (diff * diff).sum(axis=1)
    return out + out.T


def agglomerative_fit(data, k: int, linkage: str = "ward") -> Assignment:
    """Bottom-up clustering down to ``k`` clusters.

    Ties between candidate merges go to the lexicographically smallest
    ``(i, j)`` cluster-id pair. Labels are numbered by first appearance.
    ``metadata["merges"]`` lists ``(kept_id, absorbed_id, cost)`` in order.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    X = data.X if hasattr(data, "X") else data
    X = np.ascontiguousarray(X, dtype=np.float64)
    n_obs = X.shape[0]
    if not 1 <= k <= n_obs:
        raise ValueError(f"k={k} outside [1, {n_obs}]")
    Dl = _exact_sqdist(X)
    Dl = 0.5 * Dl if linkage == "ward" else np.sqrt(Dl)
    merges, costs = _agglomerate(Dl, k, _WARD if linkage == "ward" else _COMPLETE)
    root = np.arange(n_obs)
    for i, j in merges:
        root[root == j] = i
    _, first, inverse = np.unique(root, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first)] = np.arange(first.size)
    return Assignment(
        rank[inverse],
        metadata={"merges": [(int(i), int(j), float(c)) for (i, j), c in zip(merges, costs)], "linkage": linkage},
    )


def ward_fit(data, k: int) -> Assignment:
    return agglomerative_fit(data, k, "ward")
