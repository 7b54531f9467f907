"""
Shepp-Logan style numerical phantom with a smooth polynomial phase.
"""

from typing import Tuple

import numpy as np

from pnpmri import config
from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import InvalidArgumentError

# (intensity, semi-axis a, semi-axis b, center x, center y, rotation in degrees).
# Ventricles are lightened so the whole head stays inside the support.
_ELLIPSES = (
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.15, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.15, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)


def unit_grid(shape: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    """Pixel-center coordinates in ``[-1, 1]``, ``y`` pointing up."""
    height, width = shape
    xs = (np.arange(width) - width / 2 + 0.5) / (width / 2)
    ys = (height / 2 - np.arange(height) - 0.5) / (height / 2)
    return np.meshgrid(xs, ys)


def _magnitude(shape: Tuple[int, int]) -> np.ndarray:
    x, y = unit_grid(shape)
    mag = np.zeros(shape)
    for value, axis_a, axis_b, x0, y0, angle in _ELLIPSES:
        theta = np.deg2rad(angle)
        xr = (x - x0) * np.cos(theta) + (y - y0) * np.sin(theta)
        yr = -(x - x0) * np.sin(theta) + (y - y0) * np.cos(theta)
        mag[(xr / axis_a) ** 2 + (yr / axis_b) ** 2 <= 1.0] += value
    return np.clip(mag, 0.0, 1.0)


def make_phantom(shape: Tuple[int, int], seed: int) -> Tuple[ComplexImage, np.ndarray]:
    """
    Builds the complex phantom and its support.

    Parameters
    ----------
    shape : Tuple[int, int]
        Image shape, both sides at least 16.
    seed : int
        Seed of the phase polynomial coefficients.

    Returns
    -------
    Tuple[ComplexImage, np.ndarray]
        The phantom and the boolean region of interest (magnitude > 0).
    """
    height, width = shape
    if min(height, width) < config.MIN_PHANTOM_SIZE:
        raise InvalidArgumentError(
            f"phantom sides must be >= {config.MIN_PHANTOM_SIZE}, got {shape}"
        )
    mag = _magnitude((height, width))
    x, y = unit_grid((height, width))
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-1.0, 1.0, size=6) * np.array([np.pi, 1.0, 1.0, 0.5, 0.5, 0.5])
    phase = (
        coeffs[0]
        + coeffs[1] * x
        + coeffs[2] * y
        + coeffs[3] * x * x
        + coeffs[4] * x * y
        + coeffs[5] * y * y
    )
    return ComplexImage(mag * np.exp(1j * phase)), mag > 0
