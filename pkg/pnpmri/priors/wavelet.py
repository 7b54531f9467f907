"""
Orthonormal 2-D wavelet analysis and synthesis of complex images.

Real and imaginary parts are transformed separately with PyWavelets in
periodization mode, which keeps an orthogonal wavelet orthonormal when both
sides are divisible by ``2 ** levels``.
"""

from typing import Any, List, Tuple

import numpy as np
import pywt

from pnpmri.exceptions import InvalidArgumentError

Slices = List[Any]


def check_shape(shape: Tuple[int, int], levels: int):
    """Raises unless both sides are divisible by ``2 ** levels``."""
    if levels < 1:
        raise InvalidArgumentError(f"wavelet levels must be >= 1, got {levels}")
    step = 2**levels
    if shape[0] % step or shape[1] % step:
        raise InvalidArgumentError(
            f"shape {shape} is not divisible by 2^{levels} = {step}"
        )


def _analysis_real(data: np.ndarray, wavelet: str, levels: int) -> Tuple[np.ndarray, Slices]:
    coeffs = pywt.wavedec2(data, wavelet, mode="periodization", level=levels)
    return pywt.coeffs_to_array(coeffs)


def _synthesis_real(array: np.ndarray, slices: Slices, wavelet: str) -> np.ndarray:
    coeffs = pywt.array_to_coeffs(array, slices, output_format="wavedec2")
    return pywt.waverec2(coeffs, wavelet, mode="periodization")


def analysis(data: np.ndarray, wavelet: str, levels: int) -> Tuple[np.ndarray, Slices]:
    """
    Computes the wavelet coefficients of a complex image.

    Returns
    -------
    Tuple[np.ndarray, Slices]
        The coefficients packed in an image-sized complex array and the
        PyWavelets slices describing the packing.
    """
    check_shape(data.shape, levels)
    real, slices = _analysis_real(data.real, wavelet, levels)
    imag, _ = _analysis_real(data.imag, wavelet, levels)
    return real + 1j * imag, slices


def synthesis(array: np.ndarray, slices: Slices, wavelet: str) -> np.ndarray:
    """Inverts :func:`analysis`."""
    real = _synthesis_real(array.real, slices, wavelet)
    imag = _synthesis_real(array.imag, slices, wavelet)
    return real + 1j * imag


def detail_mask(shape: Tuple[int, int], slices: Slices) -> np.ndarray:
    """Marks the packed coefficients that belong to detail bands."""
    mask = np.ones(shape, dtype=bool)
    mask[slices[0]] = False
    return mask
