"""
Image quality metrics on magnitude images.
"""

import math
from typing import Tuple, Union

import numpy as np
from skimage.metrics import structural_similarity

from pnpmri import config
from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import DimensionError, InvalidArgumentError


def _magnitudes(x: np.ndarray, ref: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if x.shape != ref.shape:
        raise DimensionError(f"image {x.shape} vs reference {ref.shape}")
    return np.abs(x), np.abs(ref)


def psnr_array(x: np.ndarray, ref: np.ndarray, mask: np.ndarray) -> float:
    """Array-level :func:`psnr_roi`."""
    xm, rm = _magnitudes(x, ref)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != rm.shape:
        raise DimensionError(f"mask {mask.shape} vs reference {rm.shape}")
    if not np.any(mask):
        raise InvalidArgumentError("the region of interest is empty")
    peak = float(rm[mask].max())
    if peak == 0:
        raise InvalidArgumentError("the reference vanishes on the region of interest")
    mse = float(np.mean((xm[mask] - rm[mask]) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def psnr_roi(x: ComplexImage, ref: ComplexImage, mask: np.ndarray) -> float:
    """
    PSNR of magnitudes restricted to a region of interest.

    Parameters
    ----------
    x : ComplexImage
        The reconstruction.
    ref : ComplexImage
        The reference.
    mask : np.ndarray
        Boolean region of interest; both the peak ``max |ref|`` and the MSE
        are taken over it.

    Returns
    -------
    float
        The PSNR in dB, ``inf`` for identical magnitudes.
    """
    return psnr_array(x.data, ref.data, mask)


def ssim_array(x: np.ndarray, ref: np.ndarray) -> float:
    """Array-level :func:`ssim`."""
    xm, rm = _magnitudes(x, ref)
    return float(
        structural_similarity(
            xm,
            rm,
            data_range=float(rm.max()),
            gaussian_weights=True,
            sigma=config.SSIM_WINDOW_SIGMA,
            use_sample_covariance=False,
            K1=config.SSIM_K1,
            K2=config.SSIM_K2,
        )
    )


def ssim(x: ComplexImage, ref: ComplexImage) -> float:
    """
    Mean structural similarity of magnitudes with an 11x11 Gaussian window
    (sigma 1.5) and dynamic range ``max |ref|``.
    """
    return ssim_array(x.data, ref.data)


def cap_psnr(value: Union[float, None]) -> Union[float, None]:
    """Replaces ``inf`` by the CSV cap."""
    if value is None:
        return None
    return min(value, config.PSNR_CSV_CAP)


def make_monitor(ref: np.ndarray, mask: np.ndarray):
    """Returns a solver monitor computing ``(psnr, ssim)`` against ``ref``."""
    return lambda x: (psnr_array(x, ref, mask), ssim_array(x, ref))
