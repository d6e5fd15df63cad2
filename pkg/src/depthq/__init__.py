"""Depth-based two-sample homogeneity tests built on the Q statistic."""

from .depth import (
    DepthSpec,
    DepthTransformer,
    compute_depth,
    euclidean_depth,
    halfspace_depth,
    halfspace_depth_bruteforce_2d,
    mahalanobis_depth,
    projection_depth,
    spatial_depth,
)
from .exceptions import DimensionError, InputError, NumericFailure
from .qstat import DepthQTest, QPair, TestReport, q_pair, q_statistic, run_test

__all__ = [
    "DepthQTest",
    "DepthSpec",
    "DepthTransformer",
    "DimensionError",
    "InputError",
    "NumericFailure",
    "QPair",
    "TestReport",
    "compute_depth",
    "euclidean_depth",
    "halfspace_depth",
    "halfspace_depth_bruteforce_2d",
    "mahalanobis_depth",
    "projection_depth",
    "q_pair",
    "q_statistic",
    "run_test",
    "spatial_depth",
]
