"""Time series clustering methods, distances, validity indices and a benchmark harness."""

from .core import Assignment, LabeledDataset, load_ucr_dataset, z_normalize
from .distances import DistanceMatrix, DtwParams, distance_matrix, dtw, euclidean, lb_keogh, sbd
from .evaluation import ScoreSet, external_scores, spread, winning_counts

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "DistanceMatrix",
    "DtwParams",
    "LabeledDataset",
    "ScoreSet",
    "distance_matrix",
    "dtw",
    "euclidean",
    "external_scores",
    "lb_keogh",
    "load_ucr_dataset",
    "sbd",
    "spread",
    "winning_counts",
    "z_normalize",
]
