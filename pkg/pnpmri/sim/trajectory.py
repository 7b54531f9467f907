"""
Sampling trajectories: interleaved Archimedean spirals and the full
Cartesian grid.
"""

from typing import Tuple

import numpy as np

from pnpmri.core.types import Trajectory
from pnpmri.exceptions import InvalidArgumentError
from pnpmri.operators.ndft import centered_indices


def spiral_turns(shots: int, samples_per_shot: int) -> float:
    """
    Turns per interleave balancing along-track and across-track spacing at
    the edge of k-space.
    """
    return max(np.sqrt(samples_per_shot / (2.0 * np.pi * shots)), 0.25)


def make_spiral(shape: Tuple[int, int], shots: int, samples_per_shot: int) -> Trajectory:
    """
    Builds an interleaved Archimedean spiral.

    Shot ``s`` is the first shot rotated by ``2 pi s / shots``; the radius
    grows linearly from 0 to ``0.5 (1 - 1/max(H, W))``. Density weights are
    proportional to ``max(|k|, 1/max(H, W))`` with mean 1.

    Parameters
    ----------
    shape : Tuple[int, int]
        Image shape.
    shots : int
        Number of interleaves, at least 1.
    samples_per_shot : int
        Samples on each interleave, at least 2.
    """
    if shots < 1 or samples_per_shot < 2:
        raise InvalidArgumentError(
            f"need shots >= 1 and samples_per_shot >= 2, got {shots}, {samples_per_shot}"
        )
    size = max(shape)
    r_max = 0.5 * (1.0 - 1.0 / size)
    t = np.linspace(0.0, 1.0, samples_per_shot)
    radius = r_max * t
    turns = spiral_turns(shots, samples_per_shot)
    angles = (
        2.0 * np.pi * turns * t[None, :]
        + 2.0 * np.pi * np.arange(shots)[:, None] / shots
    )
    kx = (radius[None, :] * np.cos(angles)).ravel()
    ky = (radius[None, :] * np.sin(angles)).ravel()
    weights = np.maximum(np.hypot(kx, ky), 1.0 / size)
    return Trajectory(np.stack([kx, ky], axis=1), weights / weights.mean())


def make_cartesian(shape: Tuple[int, int]) -> Trajectory:
    """
    The full Cartesian grid ``k = (col / W, row / H)`` with centered integer
    indices, row-major, unit weights. On it the NDFT is the unitary centered
    DFT.
    """
    height, width = shape
    ky, kx = np.meshgrid(
        centered_indices(height) / height, centered_indices(width) / width, indexing="ij"
    )
    points = np.stack([kx.ravel(), ky.ravel()], axis=1)
    return Trajectory(points, np.ones(points.shape[0]))
