from .base import (
    ALGORITHMS,
    DENSITY_BASED,
    NOISE,
    Algorithm,
    ClusterAssignment,
    ClusteringError,
    pairwise_distances,
    relabel_first_seen,
    same_partition,
)
from .density import dbscan, optics, optics_ordering, xi_clusters
from .gmm import gmm
from .hierarchical import agglomerative, birch, ward
from .kmeans import kmeans, wcss
from .kmedoids import kmedoids

__all__ = [
    "ALGORITHMS",
    "DENSITY_BASED",
    "NOISE",
    "Algorithm",
    "ClusterAssignment",
    "ClusteringError",
    "agglomerative",
    "birch",
    "dbscan",
    "gmm",
    "kmeans",
    "kmedoids",
    "optics",
    "optics_ordering",
    "pairwise_distances",
    "relabel_first_seen",
    "same_partition",
    "ward",
    "wcss",
    "xi_clusters",
]
