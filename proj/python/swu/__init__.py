"""Structure-wise uncertainty kernels and evaluation metrics on numpy arrays.

Volumes are (z, y, x) float32 arrays; ensembles stack members as (T, z, y, x).
Masks are bool or uint8 arrays of 0/1.
"""

from ._swu import (
    FrocCurve,
    SwuError,
    aggregate,
    average_entropy_map,
    average_recall,
    binary_entropy,
    connected_components,
    entropy_map,
    fp_reduction,
    froc_curve,
    logit,
    mean_prediction,
    mutual_information_map,
    pairwise_dice_score,
    spearman_abs,
    variance_map,
)

__all__ = [
    "FrocCurve",
    "SwuError",
    "aggregate",
    "average_entropy_map",
    "average_recall",
    "binary_entropy",
    "connected_components",
    "entropy_map",
    "fp_reduction",
    "froc_curve",
    "logit",
    "mean_prediction",
    "mutual_information_map",
    "pairwise_dice_score",
    "spearman_abs",
    "variance_map",
]
