"""
Virtual coil combination of per-coil images into one phase-aligned complex
image.
"""

from typing import List, Sequence, Tuple

import numpy as np
from scipy.ndimage import gaussian_filter

from pnpmri import config
from pnpmri.core.types import ComplexImage, MulticoilKSpace, Trajectory
from pnpmri.exceptions import DimensionError, InvalidArgumentError
from pnpmri.operators.ndft import NDFTPlan


def _low_pass(stack: np.ndarray, sigma: float) -> np.ndarray:
    spatial = (0,) + (sigma, sigma) if stack.ndim == 3 else (sigma, sigma)
    return gaussian_filter(stack.real, spatial, mode="reflect") + 1j * gaussian_filter(
        stack.imag, spatial, mode="reflect"
    )


def _unit_phase(values: np.ndarray) -> np.ndarray:
    modulus = np.abs(values)
    return np.where(modulus > 0, values / np.where(modulus > 0, modulus, 1.0), 1.0)


def virtual_coil_combine(coil_images: Sequence[ComplexImage]) -> ComplexImage:
    """
    Combines coil images through a virtual reference coil.

    The reference ``v = sum_l w_l c_l`` uses ``w_l = conj(lp(c_l))``
    normalized over coils. Each coil is phase-aligned to ``v``, smoothed
    into ``s_l``, and the output pixel is
    ``sum_l conj(s_l) c_l / sqrt(sum_l |s_l|^2)``, whose magnitude is at
    most the root sum of squares and equal to it where the smoothed coils
    are parallel to the raw ones. ``lp`` is a Gaussian of standard
    deviation ``max(H, W) / 32`` pixels.

    Parameters
    ----------
    coil_images : Sequence[ComplexImage]
        One image per coil, all the same shape.
    """
    if len(coil_images) == 0:
        raise InvalidArgumentError("virtual coil combination needs at least one coil")
    shape = coil_images[0].shape
    if any(img.shape != shape for img in coil_images):
        raise DimensionError("coil images have different shapes")
    coils = np.stack([img.data for img in coil_images])
    sigma = max(shape) / config.COMBINE_SMOOTHING_DIVISOR

    smooth = _low_pass(coils, sigma)
    norm = np.sqrt(np.sum(np.abs(smooth) ** 2, axis=0))
    weights = smooth.conj() / np.where(norm > 0, norm, 1.0)
    reference = np.sum(weights * coils, axis=0)

    aligned = _low_pass(coils * _unit_phase(reference).conj(), sigma)
    energy = np.sqrt(np.sum(np.abs(aligned) ** 2, axis=0))
    combined = np.sum(aligned.conj() * coils, axis=0)
    combined = np.where(energy > 0, combined / np.where(energy > 0, energy, 1.0), 0)
    return ComplexImage(combined)


def coil_images(
    y: MulticoilKSpace, traj: Trajectory, shape: Tuple[int, int]
) -> List[ComplexImage]:
    """Density-compensated adjoint image of every coil."""
    if y.n_samples != len(traj):
        raise DimensionError(f"{y.n_samples} samples for {len(traj)} points")
    images = NDFTPlan(traj, shape).adjoint(y.coils * traj.density_weights[None, :])
    return [ComplexImage(img) for img in images]


def root_sum_of_squares(coil_images_: Sequence[ComplexImage]) -> np.ndarray:
    """Pixelwise root sum of squares magnitude."""
    return np.sqrt(sum(np.abs(img.data) ** 2 for img in coil_images_))
