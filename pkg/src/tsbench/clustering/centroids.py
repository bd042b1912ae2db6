"""Cluster representatives: arithmetic mean, DBA and shape extraction."""

from __future__ import annotations

import enum

import numpy as np

from ..core import z_normalize
from ..distances import DtwParams, dtw_path_arrays, sbd, sbd_with_shift, shift_series


class CentroidStrategy(str, enum.Enum):
    ARITHMETIC_MEAN = "arithmetic_mean"
    DBA = "dba"
    SHAPE_EXTRACTION = "shape_extraction"
    MEDOID = "medoid"


# the distance each averaging strategy is defined for; medoids work with any
COMPATIBLE = {
    CentroidStrategy.ARITHMETIC_MEAN: "euclidean",
    CentroidStrategy.DBA: "dtw",
    CentroidStrategy.SHAPE_EXTRACTION: "sbd",
}


def arithmetic_mean(members) -> np.ndarray:
    return np.asarray(members, dtype=np.float64).mean(axis=0)


def dba_centroid(members, current, dtw_params: DtwParams = DtwParams()) -> np.ndarray:
    """One DTW barycenter averaging pass starting from ``current``.

    Every member is aligned to ``current`` along its optimal warping path and
    each centroid coordinate becomes the mean of the member values mapped
    onto it.
    """
    members = np.asarray(members, dtype=np.float64)
    current = np.ascontiguousarray(current, dtype=np.float64)
    n = current.size
    w = dtw_params.window(n)
    sums = np.zeros(n)
    counts = np.zeros(n)
    for m in members:
        pi, pj, _ = dtw_path_arrays(current, np.ascontiguousarray(m), w)
        np.add.at(sums, pi, m[pj])
        np.add.at(counts, pi, 1)
    return sums / counts


def shape_extract(members, reference=None) -> np.ndarray:
    """Shape centroid of ``members`` as used by k-Shape.

    Members are z-normalized and shifted onto ``reference`` (skipped when the
    reference is absent or flat); the centroid is the leading eigenvector of
    the centered scatter matrix of the aligned members, z-normalized, with
    the sign that lies closer to the reference in SBD.
    """
    members = np.atleast_2d(np.asarray(members, dtype=np.float64))
    n = members.shape[1]
    flat_ref = reference is None or np.std(reference) == 0.0
    aligned = []
    for m in members:
        z = z_normalize(m)
        if not flat_ref:
            _, shift = sbd_with_shift(reference, m)
            z = shift_series(z, shift)
        aligned.append(z)
    A = np.vstack(aligned)
    if not A.any():
        return np.zeros(n)
    S = A.T @ A
    Q = np.eye(n) - 1.0 / n
    M = Q @ S @ Q
    _, vecs = np.linalg.eigh(M)
    c = z_normalize(vecs[:, -1])
    if not c.any():
        return np.zeros(n)
    if flat_ref:
        if (A @ c).sum() < 0:
            c = -c
    elif sbd(-c, reference) < sbd(c, reference):
        c = -c
    return c
