"""Euclidean, banded DTW and shape-based distances plus pruning bounds.

The DTW local cost is the squared difference and the result is the square
root of the accumulated cost, so a zero-width band reproduces the Euclidean
distance exactly.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba as nb
import numpy as np

from .core import as_series, z_normalize
from .errors import LengthMismatch

MEASURES = ("euclidean", "dtw", "sbd")

_jit = dict(nogil=True, cache=True)


@dataclass(frozen=True)
class DtwParams:
    """Sakoe-Chiba band given as a fraction of the series length."""

    window_fraction: float = 0.05
    rounding: str = "ceil"

    def __post_init__(self):
        if not 0.0 <= self.window_fraction <= 1.0:
            raise ValueError("window_fraction must lie in [0, 1]")
        if self.rounding not in ("ceil", "floor", "round"):
            raise ValueError(f"unknown rounding {self.rounding!r}")

    def window(self, n: int) -> int:
        raw = self.window_fraction * n
        # 0.05 * 20 evaluates to 1.0000000000000002; do not let that ceil to 2
        if self.rounding == "ceil":
            w = math.ceil(raw - 1e-9)
        elif self.rounding == "floor":
            w = math.floor(raw + 1e-9)
        else:
            w = int(math.floor(raw + 0.5))
        return max(0, min(w, n - 1))


def _pair(t1, t2):
    a, b = as_series(t1), as_series(t2)
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {a.size} and {b.size} differ")
    return a, b


@nb.njit(**_jit)
def _sqeuclid(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        d = a[i] - b[i]
        s += d * d
    return s


@nb.njit(**_jit)
def _dtw_sq(a, b, w):
    n = a.shape[0]
    m = b.shape[0]
    inf = np.inf
    prev = np.full(m + 1, inf)
    curr = np.full(m + 1, inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        curr[:] = inf
        lo = max(1, i - w)
        hi = min(m, i + w)
        for j in range(lo, hi + 1):
            d = a[i - 1] - b[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if curr[j - 1] < best:
                best = curr[j - 1]
            curr[j] = d * d + best
        prev, curr = curr, prev
    return prev[m]


@nb.njit(**_jit)
def _dtw_cost_matrix(a, b, w):
    n = a.shape[0]
    m = b.shape[0]
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(max(1, i - w), min(m, i + w) + 1):
            d = a[i - 1] - b[j - 1]
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = d * d + best
    return D


@nb.njit(**_jit)
def _envelope(t, w):
    n = t.shape[0]
    upper = np.empty(n)
    lower = np.empty(n)
    for i in range(n):
        lo = max(0, i - w)
        hi = min(n - 1, i + w)
        u = t[lo]
        l = t[lo]
        for j in range(lo + 1, hi + 1):
            if t[j] > u:
                u = t[j]
            if t[j] < l:
                l = t[j]
        upper[i] = u
        lower[i] = l
    return upper, lower


@nb.njit(**_jit)
def _lb_keogh_sq(upper, lower, q):
    s = 0.0
    for i in range(q.shape[0]):
        if q[i] > upper[i]:
            d = q[i] - upper[i]
            s += d * d
        elif q[i] < lower[i]:
            d = q[i] - lower[i]
            s += d * d
    return s


@nb.njit(**_jit)
def _dtw_rows(X, w, lo, hi, out):
    n_obs = X.shape[0]
    for i in range(lo, hi):
        for j in range(i + 1, n_obs):
            v = math.sqrt(_dtw_sq(X[i], X[j], w))
            out[i, j] = v
            out[j, i] = v


@nb.njit(**_jit)
def _sqeuclid_rows(X, lo, hi, out):
    n_obs = X.shape[0]
    for i in range(lo, hi):
        for j in range(i + 1, n_obs):
            v = math.sqrt(_sqeuclid(X[i], X[j]))
            out[i, j] = v
            out[j, i] = v


@nb.njit(**_jit)
def _lb_keogh_all(X, w):
    """Symmetric LB_Keogh matrix: max of the bound in both directions."""
    n_obs = X.shape[0]
    n = X.shape[1]
    U = np.empty((n_obs, n))
    L = np.empty((n_obs, n))
    for i in range(n_obs):
        u, l = _envelope(X[i], w)
        U[i] = u
        L[i] = l
    out = np.zeros((n_obs, n_obs))
    for i in range(n_obs):
        for j in range(i + 1, n_obs):
            a = _lb_keogh_sq(U[i], L[i], X[j])
            b = _lb_keogh_sq(U[j], L[j], X[i])
            v = math.sqrt(a if a > b else b)
            out[i, j] = v
            out[j, i] = v
    return out


def euclidean(t1, t2) -> float:
    a, b = _pair(t1, t2)
    return math.sqrt(_sqeuclid(a, b))


def dtw(t1, t2, params: DtwParams = DtwParams()) -> float:
    a, b = _pair(t1, t2)
    return math.sqrt(_dtw_sq(a, b, params.window(a.size)))


def dtw_window(t1, t2, w: int) -> float:
    """DTW with an explicit band half-width ``w`` (in samples)."""
    a, b = _pair(t1, t2)
    return math.sqrt(_dtw_sq(a, b, int(w)))


@nb.njit(**_jit)
def _backtrack(D):
    i, j = D.shape[0] - 1, D.shape[1] - 1
    pi = np.empty(i + j, np.int64)
    pj = np.empty(i + j, np.int64)
    k = 0
    pi[k], pj[k] = i - 1, j - 1
    while i > 1 or j > 1:
        # prefer the diagonal step on ties
        best, bi, bj = D[i - 1, j - 1], i - 1, j - 1
        if D[i - 1, j] < best:
            best, bi, bj = D[i - 1, j], i - 1, j
        if D[i, j - 1] < best:
            best, bi, bj = D[i, j - 1], i, j - 1
        i, j = bi, bj
        k += 1
        pi[k], pj[k] = i - 1, j - 1
    return pi[k::-1].copy(), pj[k::-1].copy()


def dtw_path_arrays(a, b, w: int):
    D = _dtw_cost_matrix(a, b, w)
    pi, pj = _backtrack(D)
    return pi, pj, math.sqrt(D[-1, -1])


def dtw_path(t1, t2, params: DtwParams = DtwParams()):
    """Optimal warping path as a list of ``(i, j)`` index pairs, and the distance."""
    a, b = _pair(t1, t2)
    pi, pj, dist = dtw_path_arrays(a, b, params.window(a.size))
    return list(zip(pi.tolist(), pj.tolist())), dist


def envelope(t, w: int):
    return _envelope(as_series(t), int(w))


def lb_keogh(t1, t2, params: DtwParams = DtwParams()) -> float:
    """LB_Keogh of query ``t2`` against the band envelope of ``t1``."""
    a, b = _pair(t1, t2)
    upper, lower = _envelope(a, params.window(a.size))
    return math.sqrt(_lb_keogh_sq(upper, lower, b))


def shift_series(t, shift: int) -> np.ndarray:
    """Move ``t`` right by ``shift`` samples (left if negative), zero-padding."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    n = t.size
    if shift >= 0:
        out[shift:] = t[: n - shift] if shift < n else []
    else:
        out[: n + shift] = t[-shift:] if -shift < n else []
    return out


def ncc(t1, t2):
    """Normalized cross-correlation of the z-normalized inputs for lags ``-(n-1)..n-1``.

    Element ``k`` corresponds to lag ``s = k - (n - 1)`` and equals
    ``sum_m z1[m + s] * z2[m] / (|z1| |z2|)``. Returns ``None`` when either
    input is constant.
    """
    a, b = _pair(t1, t2)
    za, zb = z_normalize(a), z_normalize(b)
    denom = math.sqrt(float(za @ za) * float(zb @ zb))
    if denom == 0.0:
        return None
    return np.correlate(za, zb, mode="full") / denom


def sbd_with_shift(t1, t2):
    """Shape-based distance and the shift that aligns ``t2`` to ``t1``.

    ``shift_series(t2, shift)`` is the aligned copy of ``t2``.
    """
    a, b = _pair(t1, t2)
    cc = ncc(a, b)
    if cc is None:
        both_flat = a.std() == 0.0 and b.std() == 0.0
        return (0.0 if both_flat else 1.0), 0
    k = int(np.argmax(cc))
    return float(min(2.0, max(0.0, 1.0 - cc[k]))), k - (a.size - 1)


def sbd(t1, t2) -> float:
    return sbd_with_shift(t1, t2)[0]


def sbd_matrix(X, fast: bool = True) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    n_obs = X.shape[0]
    out = np.zeros((n_obs, n_obs))
    if not fast:
        for i in range(n_obs):
            for j in range(i + 1, n_obs):
                out[i, j] = out[j, i] = sbd(X[i], X[j])
        return out
    Z = np.vstack([z_normalize(x) for x in X]) if n_obs else X
    norms = np.sqrt((Z * Z).sum(axis=1))
    flat = norms == 0.0
    size = 1 << (2 * X.shape[1] - 1).bit_length()
    F = np.fft.rfft(Z, size, axis=1)
    n = X.shape[1]
    for i in range(n_obs):
        cc = np.fft.irfft(F[i][None, :] * np.conj(F[i + 1:]), size, axis=1)
        cc = np.concatenate([cc[:, size - (n - 1):], cc[:, :n]], axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            row = 1.0 - cc.max(axis=1) / (norms[i] * norms[i + 1:])
        row = np.clip(row, 0.0, 2.0)
        if flat[i]:
            row = np.where(flat[i + 1:], 0.0, 1.0)
        else:
            row = np.where(flat[i + 1:], 1.0, row)
        out[i, i + 1:] = row
        out[i + 1:, i] = row
    return out


@dataclass
class DistanceMatrix:
    values: np.ndarray
    measure: str

    _MAGIC = b"TSDM"
    _HEADER = struct.Struct("<4sB11sQ")

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    def to_bytes(self) -> bytes:
        header = self._HEADER.pack(self._MAGIC, 1, self.measure.encode("ascii"), self.n_obs)
        return header + self.values.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, data: bytes) -> "DistanceMatrix":
        magic, version, tag, n_obs = cls._HEADER.unpack_from(data)
        if magic != cls._MAGIC or version != 1:
            raise ValueError("not a distance matrix file")
        body = np.frombuffer(data, dtype="<f8", offset=cls._HEADER.size)
        if body.size != n_obs * n_obs:
            raise ValueError("truncated distance matrix file")
        return cls(body.reshape(n_obs, n_obs).copy(), tag.rstrip(b"\0").decode("ascii"))

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "DistanceMatrix":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def _row_blocks(n_obs, n_jobs):
    # Row i costs n_obs - i pairs; split so blocks carry similar pair counts.
    total = n_obs * (n_obs - 1) / 2
    bounds, acc, target = [0], 0.0, total / max(n_jobs, 1)
    for i in range(n_obs):
        acc += n_obs - 1 - i
        if acc >= target * len(bounds) and len(bounds) < n_jobs:
            bounds.append(i + 1)
    bounds.append(n_obs)
    return [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]


def distance_matrix(data, measure: str = "euclidean", params: DtwParams = DtwParams(), n_jobs: int = 1) -> DistanceMatrix:
    """All pairwise distances of ``data`` (a dataset or an ``(n_obs, n)`` array)."""
    X = data.X if hasattr(data, "X") else np.asarray(data, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    n_obs = X.shape[0]
    out = np.zeros((n_obs, n_obs))
    if measure == "sbd":
        return DistanceMatrix(sbd_matrix(X), measure)
    if measure == "euclidean":
        kernel = lambda lo, hi: _sqeuclid_rows(X, lo, hi, out)
    elif measure == "dtw":
        w = params.window(X.shape[1]) if n_obs else 0
        kernel = lambda lo, hi: _dtw_rows(X, w, lo, hi, out)
    else:
        raise ValueError(f"unknown measure {measure!r}")
    blocks = _row_blocks(n_obs, n_jobs)
    if n_jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(lambda b: kernel(*b), blocks))
    else:
        for lo, hi in blocks:
            kernel(lo, hi)
    return DistanceMatrix(out, measure)


def sbd_cross(X, C) -> np.ndarray:
    """``(n_obs, k)`` shape-based distances, one FFT product per centroid."""
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    n = X.shape[1]
    size = 1 << (2 * n - 1).bit_length()
    ZX = np.vstack([z_normalize(x) for x in X])
    ZC = np.vstack([z_normalize(c) for c in C])
    nx = np.sqrt((ZX * ZX).sum(axis=1))
    nc = np.sqrt((ZC * ZC).sum(axis=1))
    FX = np.fft.rfft(ZX, size, axis=1)
    out = np.empty((X.shape[0], C.shape[0]))
    for c in range(C.shape[0]):
        fc = np.fft.rfft(ZC[c], size)
        cc = np.fft.irfft(FX * np.conj(fc)[None, :], size, axis=1)
        cc = np.concatenate([cc[:, size - (n - 1):], cc[:, :n]], axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            col = np.clip(1.0 - cc.max(axis=1) / (nx * nc[c]), 0.0, 2.0)
        if nc[c] == 0.0:
            col = np.where(nx == 0.0, 0.0, 1.0)
        else:
            col = np.where(nx == 0.0, 1.0, col)
        out[:, c] = col
    return out


@nb.njit(**_jit)
def _dtw_cross(X, C, w):
    out = np.empty((X.shape[0], C.shape[0]))
    for i in range(X.shape[0]):
        for c in range(C.shape[0]):
            out[i, c] = math.sqrt(_dtw_sq(X[i], C[c], w))
    return out


def cross_distances(X, C, measure: str, params: DtwParams = DtwParams()) -> np.ndarray:
    """``(n_obs, k)`` distances from each row of ``X`` to each row of ``C``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    if measure == "euclidean":
        diff = X[:, None, :] - C[None, :, :]
        return np.sqrt((diff * diff).sum(axis=2))
    if measure == "dtw":
        return _dtw_cross(X, C, params.window(X.shape[1]))
    if measure == "sbd":
        return sbd_cross(X, C)
    raise ValueError(f"unknown measure {measure!r}")
