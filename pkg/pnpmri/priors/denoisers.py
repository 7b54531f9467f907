"""
The noise-level conditioned denoisers ``D_sigma`` plugged into PnP solvers.
"""

from __future__ import annotations

import shutil
from pathlib import Path
from typing import List, Union

import numpy as np
import pywt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pnpmri import config
from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import InvalidArgumentError
from pnpmri.kinds import DenoiserKind
from pnpmri.priors import wavelet as wt


class DenoiserSpec(BaseModel):
    """
    Configuration of a denoiser.

    Built-in kinds map the noise level to a threshold ``tau = tau_gain *
    sigma``. The external kind runs ``executable args...`` in ``workdir``
    and talks to it through the ``DNZ1`` protocol.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DenoiserKind = DenoiserKind.WAVELET_SOFT_THRESHOLD
    levels: int = Field(default=config.WAVELET_LEVELS, ge=1)
    tau_gain: float = Field(default=config.TAU_GAIN, ge=0.0)
    wavelet: str = config.WAVELET
    executable: Union[str, None] = None
    args: List[str] = Field(default_factory=list)
    workdir: Union[str, None] = None
    timeout: float = Field(default=config.EXTERNAL_TIMEOUT, gt=0.0)

    @field_validator("wavelet")
    @classmethod
    def _orthogonal_wavelet(cls, name: str) -> str:
        if name not in pywt.wavelist(kind="discrete") or not pywt.Wavelet(name).orthogonal:
            raise ValueError(f"'{name}' is not an orthogonal discrete wavelet")
        return name

    @model_validator(mode="after")
    def _external_executable(self) -> DenoiserSpec:
        if self.kind is DenoiserKind.EXTERNAL:
            if not self.executable:
                raise ValueError("the external denoiser needs an executable")
            if not Path(self.executable).is_file() and shutil.which(self.executable) is None:
                raise ValueError(f"executable '{self.executable}' does not exist")
            if self.workdir is not None and not Path(self.workdir).is_dir():
                raise ValueError(f"working directory '{self.workdir}' does not exist")
        return self

    def threshold(self, sigma: float) -> float:
        """The threshold ``tau`` used at noise level ``sigma``."""
        return self.tau_gain * sigma


def soft_threshold(z, tau: float):
    """
    Complex soft-thresholding ``z * max(1 - tau / |z|, 0)``, with 0 → 0.

    Works on scalars and arrays; it is the proximal operator of
    ``tau * |.|``.
    """
    if tau < 0:
        raise InvalidArgumentError(f"threshold must be nonnegative, got {tau}")
    values = np.asarray(z, dtype=np.complex128)
    modulus = np.abs(values)
    safe = np.where(modulus > 0, modulus, 1.0)
    shrunk = np.where(modulus > 0, values * np.maximum(1.0 - tau / safe, 0.0), 0.0)
    if np.ndim(z) == 0:
        return complex(shrunk)
    return shrunk


def wavelet_shrink(data: np.ndarray, tau: float, wavelet: str, levels: int) -> np.ndarray:
    """
    Soft-thresholds the detail coefficients of an orthonormal wavelet
    transform, leaving the approximation band untouched. This is the
    proximal operator of ``tau * ||W_detail .||_1``.
    """
    coeffs, slices = wt.analysis(data, wavelet, levels)
    details = wt.detail_mask(coeffs.shape, slices)
    coeffs = np.where(details, soft_threshold(coeffs, tau), coeffs)
    return wt.synthesis(coeffs, slices, wavelet)


def denoise_array(spec: DenoiserSpec, data: np.ndarray, sigma: float) -> np.ndarray:
    """Applies a built-in denoiser to an ``(H, W)`` array."""
    if sigma < 0:
        raise InvalidArgumentError(f"noise level must be nonnegative, got {sigma}")
    tau = spec.threshold(sigma)
    if spec.kind is DenoiserKind.IDENTITY or tau == 0:
        if spec.kind is DenoiserKind.WAVELET_SOFT_THRESHOLD:
            wt.check_shape(data.shape, spec.levels)
        return np.array(data, dtype=np.complex128, copy=True)
    if spec.kind is DenoiserKind.SOFT_THRESHOLD:
        return soft_threshold(data, tau)
    if spec.kind is DenoiserKind.WAVELET_SOFT_THRESHOLD:
        return wavelet_shrink(data, tau, spec.wavelet, spec.levels)
    raise InvalidArgumentError(f"'{spec.kind.value}' is not a built-in denoiser")


class BuiltinDenoiser:
    """
    A stateless handle around a built-in denoiser kind. Handles share the
    interface of :class:`pnpmri.priors.external.ExternalDenoiser`.
    """

    def __init__(self, spec: DenoiserSpec):
        if spec.kind is DenoiserKind.EXTERNAL:
            raise InvalidArgumentError("use ExternalDenoiser for external kinds")
        self.spec = spec

    def __call__(self, data: np.ndarray, sigma: float) -> np.ndarray:
        return denoise_array(self.spec, data, sigma)

    def close(self):
        """Nothing to release."""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()


def open_denoiser(spec: DenoiserSpec):
    """
    Returns a denoiser handle for ``spec``. External handles own a child
    process and must be closed; use them as context managers.
    """
    if spec.kind is DenoiserKind.EXTERNAL:
        # pylint: disable=import-outside-toplevel
        from pnpmri.priors.external import ExternalDenoiser

        return ExternalDenoiser(spec)
    return BuiltinDenoiser(spec)


def denoise(spec: DenoiserSpec, u: ComplexImage, sigma: float) -> ComplexImage:
    """
    Applies ``D_sigma`` to an image.

    Parameters
    ----------
    spec : DenoiserSpec
        The denoiser configuration. External kinds start a process for this
        single call.
    u : ComplexImage
        The noisy input.
    sigma : float
        The denoising power, nonnegative.
    """
    with open_denoiser(spec) as handle:
        return ComplexImage(handle(u.data, sigma))
