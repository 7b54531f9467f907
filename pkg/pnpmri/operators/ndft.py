"""
Non-uniform discrete Fourier transform by direct summation.

Sample ``m`` of an ``H x W`` image is

    (1 / sqrt(H W)) * sum_p img[p] * exp(-2 i pi (kx_m col_p + ky_m row_p))

with centered pixel indices ``col_p`` in ``{-W/2, ..., W/2 - 1}`` (rows
alike). The exponential separates over rows and columns, so the plan keeps
one ``(M, H)`` and one ``(M, W)`` factor instead of the full ``(M, H W)``
matrix. The adjoint is the exact conjugate transpose.
"""

from typing import Tuple

import numpy as np

from pnpmri.core.types import ComplexImage, Trajectory
from pnpmri.exceptions import DimensionError, InvalidArgumentError


def centered_indices(size: int) -> np.ndarray:
    """Pixel indices ``{-size/2, ..., size/2 - 1}``."""
    return np.arange(size) - size // 2


class NDFTPlan:
    """
    Precomputed separable phase factors for a trajectory and image shape.

    Parameters
    ----------
    trajectory : Trajectory
        The sample locations.
    shape : Tuple[int, int]
        The image shape ``(H, W)``.
    """

    def __init__(self, trajectory: Trajectory, shape: Tuple[int, int]):
        if len(trajectory) == 0:
            raise InvalidArgumentError("the trajectory holds no samples")
        height, width = shape
        self.shape = (int(height), int(width))
        self.n_samples = len(trajectory)
        self._scale = 1.0 / np.sqrt(height * width)
        self._ey = np.exp(-2j * np.pi * np.outer(trajectory.ky, centered_indices(height)))
        self._ex = np.exp(-2j * np.pi * np.outer(trajectory.kx, centered_indices(width)))
        self._ey_h = self._ey.conj().T
        self._ex_c = self._ex.conj()

    def forward(self, images: np.ndarray) -> np.ndarray:
        """
        Transforms a stack of images.

        Parameters
        ----------
        images : np.ndarray
            An array of shape ``(..., H, W)``.

        Returns
        -------
        np.ndarray
            The samples, shape ``(..., M)``.
        """
        if images.shape[-2:] != self.shape:
            raise DimensionError(f"image shape {images.shape[-2:]} vs plan {self.shape}")
        partial = images @ self._ex.T
        return np.einsum("mh,...hm->...m", self._ey, partial) * self._scale

    def adjoint(self, samples: np.ndarray) -> np.ndarray:
        """
        Applies the conjugate transpose to a stack of sample vectors.

        Parameters
        ----------
        samples : np.ndarray
            An array of shape ``(..., M)``.

        Returns
        -------
        np.ndarray
            Images of shape ``(..., H, W)``.
        """
        if samples.shape[-1] != self.n_samples:
            raise DimensionError(f"{samples.shape[-1]} samples vs plan {self.n_samples}")
        weighted = self._ey_h * samples[..., None, :]
        return (weighted @ self._ex_c) * self._scale


def ndft_forward(img: ComplexImage, traj: Trajectory) -> np.ndarray:
    """Returns the ``M`` Fourier samples of ``img`` on ``traj``."""
    return NDFTPlan(traj, img.shape).forward(img.data)


def ndft_adjoint(
    samples: np.ndarray, traj: Trajectory, shape: Tuple[int, int]
) -> ComplexImage:
    """Returns the conjugate-transpose NDFT of ``samples`` as an image."""
    samples = np.asarray(samples, dtype=np.complex128).ravel()
    if samples.shape[0] != len(traj):
        raise DimensionError(f"{samples.shape[0]} samples for {len(traj)} points")
    return ComplexImage(NDFTPlan(traj, shape).adjoint(samples))
