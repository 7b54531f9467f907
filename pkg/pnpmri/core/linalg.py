"""
Norms and inner products on complex images.
"""

from typing import Callable, Union

import numpy as np

from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import DimensionError

Metric = Callable[[np.ndarray], np.ndarray]


def image_norm(a: ComplexImage) -> float:
    """Returns the l2 norm ``sqrt(sum |a_i|^2)``."""
    return float(np.linalg.norm(a.data.ravel()))


def weighted_inner_product(
    a: ComplexImage, b: ComplexImage, metric: Union[Metric, None] = None
) -> complex:
    """
    Computes ``<a, P b>``, conjugate-linear in ``a``.

    Parameters
    ----------
    a, b : ComplexImage
        Images of equal shape.
    metric : callable, optional
        The linear operator ``P`` acting on ``(H, W)`` arrays. A bound
        preconditioner fits here. ``None`` stands for the identity.

    Returns
    -------
    complex
        The weighted inner product.
    """
    if a.shape != b.shape:
        raise DimensionError(f"images of shape {a.shape} and {b.shape}")
    pb = b.data if metric is None else np.asarray(metric(b.data))
    if pb.shape != b.shape:
        raise DimensionError(f"metric returned shape {pb.shape} for {b.shape}")
    return complex(np.vdot(a.data, pb))
