"""
The desk-scale trainable denoiser: one complex ``K x K`` kernel applied as a
residual ``f(x) = x - conv(x, theta)`` with reflective same-padding.
"""

from __future__ import annotations

import numpy as np

from pnpmri import config
from pnpmri.core.cimg import PathLike, read_cimg, write_cimg
from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import DimensionError, FormatError, InvalidArgumentError


def patch_matrix(data: np.ndarray, kernel_size: int) -> np.ndarray:
    """
    Returns the ``(H, W, K*K)`` stack of reflect-padded neighborhoods, so
    that ``conv(data, theta) = patch_matrix(data, K) @ theta.ravel()``.
    """
    pad = kernel_size // 2
    if min(data.shape) <= pad:
        raise InvalidArgumentError(
            f"image {data.shape} too small for a {kernel_size}x{kernel_size} kernel"
        )
    padded = np.pad(data, pad, mode="reflect")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (kernel_size, kernel_size))
    return windows.reshape(data.shape[0], data.shape[1], kernel_size * kernel_size)


class SmallDenoiser:
    """
    A residual single-kernel convolution.

    Parameters
    ----------
    theta : np.ndarray
        The ``(K, K)`` complex kernel, ``K`` odd.
    """

    def __init__(self, theta: np.ndarray):
        theta = np.array(theta, dtype=np.complex128)
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1] or theta.shape[0] % 2 == 0:
            raise DimensionError(f"kernel must be square with odd side, got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise InvalidArgumentError("kernel contains NaN or Inf values")
        self.theta = theta

    @classmethod
    def identity(cls, kernel_size: int = config.N2N_KERNEL_SIZE) -> SmallDenoiser:
        """The zero kernel, for which ``f`` is the identity."""
        return cls(np.zeros((kernel_size, kernel_size), dtype=np.complex128))

    @classmethod
    def scaling(cls, alpha: complex, kernel_size: int = config.N2N_KERNEL_SIZE) -> SmallDenoiser:
        """The kernel for which ``f(x) = alpha * x``."""
        theta = np.zeros((kernel_size, kernel_size), dtype=np.complex128)
        theta[kernel_size // 2, kernel_size // 2] = 1.0 - alpha
        return cls(theta)

    @property
    def kernel_size(self) -> int:
        return self.theta.shape[0]

    def conv(self, data: np.ndarray) -> np.ndarray:
        return patch_matrix(data, self.kernel_size) @ self.theta.ravel()

    def __call__(self, data: np.ndarray) -> np.ndarray:
        return data - self.conv(data)

    def apply(self, x: ComplexImage) -> ComplexImage:
        return ComplexImage(self(x.data))


def save_kernel(path: PathLike, denoiser: SmallDenoiser):
    """Stores the kernel as a ``K x K`` CIMG file."""
    write_cimg(path, ComplexImage(denoiser.theta))


def load_kernel(path: PathLike) -> SmallDenoiser:
    """Loads a kernel written by :func:`save_kernel`."""
    img = read_cimg(path)
    try:
        return SmallDenoiser(img.data)
    except DimensionError as exc:
        raise FormatError(f"{path} is not a kernel file: {exc}") from exc
