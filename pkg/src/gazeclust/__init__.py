"""Cluster-validity features from gaze data for ASD/TD screening."""
from .clustering import ALGORITHMS, NOISE, Algorithm, ClusterAssignment
from .features import FeatureMatrix, Standardizer, build_feature_matrix
from .gaze_io import DataError, Group, SynthConfig, Trial, filter_valid, generate_synthetic, load_trials, save_trials
from .indices import INDEX_NAMES, IndexVector, compute_all
from .selection import GridSpec, SelectionResult, default_grid, grid_search
from .stats import mann_whitney_u, significance_table, stars

__all__ = [
    "ALGORITHMS",
    "INDEX_NAMES",
    "NOISE",
    "Algorithm",
    "ClusterAssignment",
    "DataError",
    "FeatureMatrix",
    "GridSpec",
    "Group",
    "IndexVector",
    "SelectionResult",
    "Standardizer",
    "SynthConfig",
    "Trial",
    "build_feature_matrix",
    "compute_all",
    "default_grid",
    "filter_valid",
    "generate_synthetic",
    "grid_search",
    "load_trials",
    "mann_whitney_u",
    "save_trials",
    "significance_table",
    "stars",
]
