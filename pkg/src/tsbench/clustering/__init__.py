from .centroids import CentroidStrategy, arithmetic_mean, dba_centroid, shape_extract
from .density import DensityPeaksParams, PruningStats, cutoff_distance, density_peaks_fit, tadpole_fit
from .hierarchical import agglomerative_fit, ward_fit
from .methods import METHODS, MethodSpec, run_method
from .partitional import FitConfig, fuzzy_cmeans_fit, kmeans_fit, kmedoids_fit

__all__ = [
    "CentroidStrategy",
    "DensityPeaksParams",
    "FitConfig",
    "METHODS",
    "MethodSpec",
    "PruningStats",
    "agglomerative_fit",
    "arithmetic_mean",
    "cutoff_distance",
    "dba_centroid",
    "density_peaks_fit",
    "fuzzy_cmeans_fit",
    "kmeans_fit",
    "kmedoids_fit",
    "run_method",
    "shape_extract",
    "tadpole_fit",
    "ward_fit",
]
