"""Core data types, z-normalization and UCR-format ingestion."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ParseError

# A time series is a 1-d float64 array; no wrapper class.
TimeSeries = np.ndarray

NOISE_LABEL = "noise"


class MergePolicy(str, enum.Enum):
    MERGED = "merged"
    TRAIN_ONLY = "train_only"
    TEST_ONLY = "test_only"


def as_series(values) -> np.ndarray:
    t = np.asarray(values, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("a time series must be a non-empty 1-d sequence")
    return t


def z_normalize(t) -> np.ndarray:
    """Return ``(t - mean) / std`` using the population standard deviation.

    Constant series map to all zeros instead of dividing by zero.
    """
    t = as_series(t)
    mu = t.mean()
    sigma = t.std()
    if sigma == 0.0 or not np.isfinite(sigma):
        return np.zeros_like(t)
    return (t - mu) / sigma


@dataclass(frozen=True)
class LabeledDataset:
    """Series with opaque string class labels.

    Construction does not enforce equal lengths or finiteness so that raw
    archive files can be inspected; :func:`filter_admissible` decides
    whether the dataset can be clustered.
    """

    name: str
    series: tuple
    labels: tuple

    def __post_init__(self):
        series = tuple(np.asarray(s, dtype=np.float64) for s in self.series)
        for s in series:
            s.setflags(write=False)
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))
        if len(self.series) != len(self.labels):
            raise ValueError(
                f"{len(self.series)} series but {len(self.labels)} labels"
            )

    @classmethod
    def from_arrays(cls, name: str, X, labels: Sequence) -> "LabeledDataset":
        X = np.asarray(X, dtype=np.float64)
        return cls(name, tuple(X), tuple(labels))

    def __len__(self):
        return len(self.series)

    @property
    def lengths(self) -> set:
        return {len(s) for s in self.series}

    @property
    def length(self) -> int:
        lengths = self.lengths
        if len(lengths) != 1:
            raise ValueError(f"{self.name}: series lengths differ {sorted(lengths)}")
        return lengths.pop()

    @property
    def X(self) -> np.ndarray:
        """Series stacked into an ``(n_obs, n)`` array."""
        if not self.series:
            return np.empty((0, 0))
        self.length
        X = np.vstack(self.series)
        X.setflags(write=False)
        return X

    @property
    def k(self) -> int:
        return len({l for l in self.labels if l.lower() != NOISE_LABEL})

    def label_codes(self) -> np.ndarray:
        """Integer codes for the labels in order of first appearance."""
        codes: dict = {}
        return np.array([codes.setdefault(l, len(codes)) for l in self.labels], dtype=np.int64)


@dataclass
class Assignment:
    """Hard partition, optionally with soft memberships and fit diagnostics."""

    cluster_of: np.ndarray
    memberships: Optional[np.ndarray] = None
    history: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cluster_of = np.asarray(self.cluster_of, dtype=np.int64)
        if self.memberships is not None:
            self.memberships = np.asarray(self.memberships, dtype=np.float64)
            if self.memberships.shape[0] != self.cluster_of.shape[0]:
                raise ValueError("memberships and cluster_of disagree in length")

    def __len__(self):
        return len(self.cluster_of)

    @property
    def n_clusters(self) -> int:
        return len(np.unique(self.cluster_of))


def _parse_line(line: str, path, line_no: int):
    fields = line.rstrip("\r\n").split("\t")
    if len(fields) < 2:
        # Older archive releases separate with commas.
        fields = line.rstrip("\r\n").split(",")
    if len(fields) < 2:
        raise ParseError(path, line_no, "expected a label followed by values")
    label = fields[0].strip()
    if not label:
        raise ParseError(path, line_no, "empty label")
    try:
        values = [float(tok) for tok in fields[1:]]
    except ValueError as exc:
        raise ParseError(path, line_no, str(exc)) from None
    return label, np.array(values, dtype=np.float64)


def read_ucr_file(path):
    labels, series = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            label, values = _parse_line(line, path, line_no)
            labels.append(label)
            series.append(values)
    return labels, series


def load_ucr_dataset(path_train, path_test=None, merge_policy="merged", name=None) -> LabeledDataset:
    """Load a UCR-format dataset.

    Under ``merged`` the TRAIN rows come first, followed by the TEST rows.
    A missing or ``None`` test path is treated as an empty split.
    """
    policy = MergePolicy(merge_policy)
    if name is None:
        name = Path(path_train).name.rsplit("_TRAIN", 1)[0]
    labels, series = [], []
    parts = {
        MergePolicy.MERGED: (path_train, path_test),
        MergePolicy.TRAIN_ONLY: (path_train,),
        MergePolicy.TEST_ONLY: (path_test,),
    }[policy]
    for path in parts:
        if path is None:
            continue
        l, s = read_ucr_file(path)
        labels += l
        series += s
    return LabeledDataset(name, tuple(series), tuple(labels))


def write_ucr_file(path, ds: LabeledDataset):
    """Write ``ds`` in UCR layout; floats use the shortest round-trip repr."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for label, s in zip(ds.labels, ds.series):
            toks = ["NaN" if math.isnan(v) else repr(float(v)) for v in s]
            fh.write(label + "\t" + "\t".join(toks) + "\n")


def dataset_paths(archive_dir, name):
    base = Path(archive_dir) / name
    return base / f"{name}_TRAIN.tsv", base / f"{name}_TEST.tsv"


def scan_archive(archive_dir) -> list:
    """Names of dataset directories holding a ``<Name>_TRAIN.tsv`` file, sorted."""
    root = Path(archive_dir)
    if not root.is_dir():
        return []
    return sorted(
        p.name for p in root.iterdir() if p.is_dir() and (p / f"{p.name}_TRAIN.tsv").is_file()
    )


def load_archive_dataset(archive_dir, name, merge_policy="merged") -> LabeledDataset:
    train, test = dataset_paths(archive_dir, name)
    return load_ucr_dataset(train, test if test.is_file() else None, merge_policy, name=name)


def filter_admissible(ds: LabeledDataset) -> dict:
    reasons = []
    if len(ds.lengths) > 1:
        reasons.append("unequal_length")
    if any(not np.all(np.isfinite(s)) for s in ds.series):
        reasons.append("missing_values")
    if ds.k < 2:
        reasons.append("single_class")
    return {"admissible": not reasons, "reasons": reasons}
