"""Density Peaks clustering and its pruned DTW variant (TADPole).

Local density ``rho`` counts the other points within the cutoff ``d``
(inclusive). Points are totally ordered by density, ties going to the
lower index; ``delta`` is the distance to the nearest point earlier in that
order, or, for the first point, the largest distance to any point. The
``k`` points with the largest ``gamma = rho * delta`` become the peaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from ..core import Assignment
from ..distances import DistanceMatrix, DtwParams, _dtw_sq, _lb_keogh_all, _sqeuclid_rows, distance_matrix

ASSIGNMENT_MODES = ("closest_centroid", "higher_density_chain")


@dataclass(frozen=True)
class DensityPeaksParams:
    d: float | None = None
    neighbor_fraction: float = 0.02
    assignment_mode: str = "closest_centroid"

    def __post_init__(self):
        if self.d is not None and not self.d > 0:
            raise ValueError("cutoff distance d must be positive")
        if not 0.0 < self.neighbor_fraction <= 0.05:
            raise ValueError("neighbor_fraction must lie in (0, 0.05]")
        if self.assignment_mode not in ASSIGNMENT_MODES:
            raise ValueError(f"unknown assignment mode {self.assignment_mode!r}")


def cutoff_distance(dm, neighbor_fraction: float = 0.02) -> float:
    """Nearest-rank ``neighbor_fraction`` quantile of the pairwise distances.

    Each unordered pair is counted once, so on average a point has about
    ``neighbor_fraction * (n_obs - 1)`` neighbours within the cutoff.
    """
    D = dm.values if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=np.float64)
    n_obs = D.shape[0]
    if n_obs < 2:
        raise ValueError("need at least two observations")
    upper = np.sort(D[np.triu_indices(n_obs, 1)])
    return _nearest_rank(upper, neighbor_fraction)


def _nearest_rank(sorted_values, q):
    rank = math.ceil(q * sorted_values.size - 1e-9)
    return float(sorted_values[min(max(rank, 1), sorted_values.size) - 1])


def _density_order(rho):
    idx = np.arange(rho.size)
    order = np.lexsort((idx, -rho))
    pos = np.empty_like(order)
    pos[order] = idx
    return order, pos


def density_state(D, d):
    """Return ``rho``, ``delta`` and the nearest denser neighbour (``-1`` for the top point)."""
    D = np.asarray(D, dtype=np.float64)
    n_obs = D.shape[0]
    rho = (D <= d).sum(axis=1) - 1
    order, pos = _density_order(rho)
    delta = np.empty(n_obs)
    parent = np.full(n_obs, -1, dtype=np.int64)
    for i in range(n_obs):
        if pos[i] == 0:
            delta[i] = D[i].max()
            continue
        row = np.where(pos < pos[i], D[i], np.inf)
        j = int(np.argmin(row))
        parent[i] = j
        delta[i] = row[j]
    return rho, delta, parent


def _select_peaks(rho, delta, k, dist):
    """Top-``k`` gamma with index tie-break; farthest-point fallback when degenerate.

    ``dist(i, js)`` returns distances from ``i`` to the points ``js``.
    """
    n_obs = rho.size
    degenerate = n_obs > 1 and np.all(rho == rho[0]) and np.all(delta == delta[0])
    if not degenerate:
        gamma = rho * delta
        return np.lexsort((np.arange(n_obs), -gamma))[:k], False
    order, _ = _density_order(rho)
    peaks = [int(order[0])]
    nearest = dist(peaks[0], np.arange(n_obs))
    while len(peaks) < k:
        cand = np.where(np.isin(np.arange(n_obs), peaks), -np.inf, nearest)
        nxt = int(np.argmax(cand))
        peaks.append(nxt)
        nearest = np.minimum(nearest, dist(nxt, np.arange(n_obs)))
    return np.array(peaks), True


def _assign(peaks, parent, rho, mode, nearest_peak):
    n_obs = rho.size
    labels = np.full(n_obs, -1, dtype=np.int64)
    labels[peaks] = np.arange(peaks.size)
    order, _ = _density_order(rho)
    for i in order:
        if labels[i] >= 0:
            continue
        if mode == "higher_density_chain" and parent[i] >= 0:
            labels[i] = labels[parent[i]]
        else:
            labels[i] = nearest_peak(i)
    return labels


def density_peaks_fit(data, distance: str = "euclidean", params: DensityPeaksParams = DensityPeaksParams(),
                      k: int = 2, dm=None, dtw_params: DtwParams = DtwParams()) -> Assignment:
    if dm is None:
        dm = distance_matrix(data, distance, dtw_params)
    D = dm.values if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=np.float64)
    n_obs = D.shape[0]
    if not 1 <= k <= n_obs:
        raise ValueError(f"k={k} outside [1, {n_obs}]")
    d = params.d if params.d is not None else cutoff_distance(D, params.neighbor_fraction)
    rho, delta, parent = density_state(D, d)
    peaks, degenerate = _select_peaks(rho, delta, k, lambda i, js: D[i, js])

    def nearest_peak(i):
        return int(np.argmin(D[i, peaks]))

    labels = _assign(peaks, parent, rho, params.assignment_mode, nearest_peak)
    return Assignment(
        labels,
        metadata={"rho": rho, "delta": delta, "gamma": rho * delta, "peaks": peaks,
                  "parent": parent, "d": d, "degenerate": degenerate},
    )


@dataclass
class PruningStats:
    exact: int = 0
    ub_resolved: int = 0
    lb_resolved: int = 0

    @property
    def resolved(self) -> int:
        return self.ub_resolved + self.lb_resolved

    @property
    def total(self) -> int:
        return self.exact + self.resolved

    def as_dict(self) -> dict:
        return {"exact": self.exact, "ub_resolved": self.ub_resolved, "lb_resolved": self.lb_resolved}


@nb.njit(nogil=True, cache=True)
def _dtw_pairs(X, w, I, J):
    out = np.empty(I.size)
    for t in range(I.size):
        out[t] = math.sqrt(_dtw_sq(X[I[t]], X[J[t]], w))
    return out


_UNKNOWN, _BY_UB, _BY_LB, _EXACT = 0, 1, 2, 3


@dataclass
class _PrunedDtw:
    """Pairwise DTW oracle that remembers exact values and bound-only decisions."""

    X: np.ndarray
    w: int
    ub: np.ndarray
    lb: np.ndarray
    exact: np.ndarray = field(init=False)
    status: np.ndarray = field(init=False)

    def __post_init__(self):
        n_obs = self.X.shape[0]
        self.exact = np.full((n_obs, n_obs), np.nan)
        np.fill_diagonal(self.exact, 0.0)
        self.status = np.zeros((n_obs, n_obs), dtype=np.int8)
        # lb >= ub pins DTW to the upper bound without running it
        pinned = self.lb >= self.ub
        self.exact[pinned] = self.ub[pinned]

    def compute(self, I, J):
        I = np.asarray(I, dtype=np.int64)
        J = np.asarray(J, dtype=np.int64)
        todo = np.isnan(self.exact[I, J])
        if todo.any():
            a, b = np.minimum(I[todo], J[todo]), np.maximum(I[todo], J[todo])
            vals = _dtw_pairs(self.X, self.w, a, b)
            self.exact[a, b] = vals
            self.exact[b, a] = vals
            self.status[a, b] = self.status[b, a] = _EXACT
        return self.exact[I, J]

    def upper(self, i, js):
        e = self.exact[i, js]
        return np.where(np.isnan(e), self.ub[i, js], e)

    def lower(self, i, js):
        e = self.exact[i, js]
        return np.where(np.isnan(e), self.lb[i, js], e)

    def argmin(self, i, js, tiebreak, eps):
        """Exact minimum over ``js``; ties resolved by the smallest ``tiebreak``."""
        best = self.upper(i, js).min()
        lower = self.lower(i, js)
        cand = np.flatnonzero(lower <= best + eps)
        for t in cand[np.lexsort((tiebreak[cand], lower[cand]))]:
            if lower[t] > best + eps:
                break
            best = min(best, self.compute([i], [js[t]])[0])
        known = self.exact[i, js]
        hit = np.flatnonzero(known == np.nanmin(known[cand]))
        win = hit[np.argmin(tiebreak[hit])]
        return known[win], win

    def argmax(self, i, js, eps):
        best = self.lower(i, js).max()
        upper = self.upper(i, js)
        cand = np.flatnonzero(upper >= best - eps)
        for t in cand[np.argsort(-upper[cand], kind="stable")]:
            if upper[t] < best - eps:
                break
            best = max(best, self.compute([i], [js[t]])[0])
        return np.nanmax(self.exact[i, js][cand])

    def stats(self) -> PruningStats:
        iu = np.triu_indices(self.X.shape[0], 1)
        s = self.status[iu]
        return PruningStats(int((s == _EXACT).sum()), int((s == _BY_UB).sum()), int((s == _BY_LB).sum()))


def _sample_cutoff(oracle: _PrunedDtw, n_obs, fraction, sample_pairs, seed=0):
    I, J = np.triu_indices(n_obs, 1)
    if I.size > sample_pairs:
        pick = np.sort(np.random.default_rng(seed).choice(I.size, sample_pairs, replace=False))
        I, J = I[pick], J[pick]
    return _nearest_rank(np.sort(oracle.compute(I, J)), fraction)


def tadpole_fit(data, dtw_params: DtwParams = DtwParams(), dp_params: DensityPeaksParams = DensityPeaksParams(),
                k: int = 2, sample_pairs: int = 5000):
    """Density Peaks under DTW, skipping DTW evaluations that bounds decide.

    The Euclidean distance bounds DTW from above and the symmetric LB_Keogh
    from below. A pair is a neighbour when its upper bound is within ``d``
    and a non-neighbour when its lower bound exceeds ``d``; nearest-denser and
    nearest-peak searches evaluate only pairs whose lower bound can still
    beat the best value found. The result equals :func:`density_peaks_fit`
    on the full DTW matrix with the same ``d``.

    When ``dp_params.d`` is unset the cutoff is the quantile of at most
    ``sample_pairs`` DTW distances (all pairs when there are fewer).
    """
    X = data.X if hasattr(data, "X") else data
    X = np.ascontiguousarray(X, dtype=np.float64)
    n_obs = X.shape[0]
    if not 1 <= k <= n_obs:
        raise ValueError(f"k={k} outside [1, {n_obs}]")
    w = dtw_params.window(X.shape[1])
    ub = np.zeros((n_obs, n_obs))
    _sqeuclid_rows(X, 0, n_obs, ub)
    lb = _lb_keogh_all(X, w) if n_obs else np.zeros((0, 0))
    oracle = _PrunedDtw(X, w, ub, lb)

    d = dp_params.d
    if d is None:
        d = _sample_cutoff(oracle, n_obs, dp_params.neighbor_fraction, sample_pairs) if n_obs > 1 else 0.0
    # float slack so rounding in a bound can never prune a pair sitting exactly on a boundary
    eps = 1e-9 * max(1.0, abs(d), float(ub.max(initial=0.0)))

    I, J = np.triu_indices(n_obs, 1)
    exact = oracle.exact[I, J]
    known = ~np.isnan(exact)
    by_ub = ~known & (ub[I, J] <= d)
    by_lb = ~known & ~by_ub & (lb[I, J] > d + eps)
    # pinned pairs (lb >= ub) were settled by the bounds; sampled pairs are already exact
    pinned = known & (oracle.status[I, J] == _UNKNOWN)
    oracle.status[I[pinned], J[pinned]] = _BY_UB
    oracle.status[I[by_ub], J[by_ub]] = _BY_UB
    oracle.status[I[by_lb], J[by_lb]] = _BY_LB
    need = ~(known | by_ub | by_lb)
    oracle.compute(I[need], J[need])
    within = np.zeros(I.size, dtype=bool)
    within[known | need] = oracle.exact[I[known | need], J[known | need]] <= d
    within[by_ub] = True
    rho = np.zeros(n_obs, dtype=np.int64)
    np.add.at(rho, I[within], 1)
    np.add.at(rho, J[within], 1)

    order, pos = _density_order(rho)
    delta = np.empty(n_obs)
    parent = np.full(n_obs, -1, dtype=np.int64)
    everyone = np.arange(n_obs)
    for i in range(n_obs):
        if pos[i] == 0:
            others = everyone[everyone != i]
            delta[i] = oracle.argmax(i, others, eps) if others.size else 0.0
            continue
        denser = order[: pos[i]]
        value, win = oracle.argmin(i, denser, denser, eps)
        delta[i] = value
        parent[i] = denser[win]

    def dist(i, js):
        return oracle.compute(np.full(js.size, i), js)

    peaks, degenerate = _select_peaks(rho, delta, k, dist)
    cluster_ids = np.arange(peaks.size)

    def nearest_peak(i):
        return int(oracle.argmin(i, peaks, cluster_ids, eps)[1])

    labels = _assign(peaks, parent, rho, dp_params.assignment_mode, nearest_peak)
    stats = oracle.stats()
    assignment = Assignment(
        labels,
        metadata={"rho": rho, "delta": delta, "gamma": rho * delta, "peaks": peaks, "parent": parent,
                  "d": d, "degenerate": degenerate, "pruning": stats.as_dict()},
    )
    return assignment, stats
