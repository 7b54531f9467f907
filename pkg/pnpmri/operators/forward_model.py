"""
The stacked multicoil operator ``A = [F S_1; ...; F S_L]`` and the data
fidelity ``f(x) = 1/2 sum_l ||F S_l x - y_l||^2``.
"""

from __future__ import annotations

import threading
from typing import Tuple, Union

import numpy as np

from pnpmri import config
from pnpmri.core.types import ComplexImage, MulticoilKSpace, SensitivityMaps, Trajectory
from pnpmri.exceptions import DimensionError
from pnpmri.operators.ndft import NDFTPlan


class ForwardModel:
    """
    A multicoil acquisition model.

    The model is immutable; the only internal state is the lazily computed
    operator norm, guarded by a lock.

    Parameters
    ----------
    trajectory : Trajectory
        The k-space sampling locations.
    smaps : SensitivityMaps
        The coil sensitivity maps, which fix the image shape.
    """

    def __init__(self, trajectory: Trajectory, smaps: SensitivityMaps):
        self.trajectory = trajectory
        self.smaps = smaps
        self.shape: Tuple[int, int] = smaps.shape
        self.n_coils: int = smaps.n_coils
        self._plan = NDFTPlan(trajectory, self.shape)
        self._maps = smaps.maps
        self._maps_conj = smaps.maps.conj()
        self._lock = threading.Lock()
        self._lipschitz: Union[float, None] = None

    @property
    def n_samples(self) -> int:
        """Samples per coil ``M``."""
        return self._plan.n_samples

    def check_image(self, x: np.ndarray):
        """Raises if ``x`` does not have the model image shape."""
        if x.shape != self.shape:
            raise DimensionError(f"image shape {x.shape} vs model {self.shape}")

    def check_data(self, y: np.ndarray):
        """Raises if ``y`` is not an ``(L, M)`` array for this model."""
        if y.shape != (self.n_coils, self.n_samples):
            raise DimensionError(
                f"k-space shape {y.shape} vs model {(self.n_coils, self.n_samples)}"
            )

    def op(self, x: np.ndarray) -> np.ndarray:
        """Applies ``A`` to an ``(H, W)`` array, returning ``(L, M)``."""
        return self._plan.forward(self._maps * x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """Applies ``A^H`` to an ``(L, M)`` array, returning ``(H, W)``."""
        return np.sum(self._maps_conj * self._plan.adjoint(y), axis=0)

    def normal(self, x: np.ndarray) -> np.ndarray:
        """Applies ``A^H A``."""
        return self.adjoint(self.op(x))

    def lipschitz(self) -> float:
        """
        Returns ``lambda_max(A^H A)``, estimated once by power iteration
        with the library defaults.
        """
        with self._lock:
            if self._lipschitz is None:
                # pylint: disable=import-outside-toplevel
                from pnpmri.operators.spectral import estimate_operator_norm

                self._lipschitz = estimate_operator_norm(
                    self, config.POWER_ITERATIONS, config.POWER_SEED
                )
            return self._lipschitz


def forward(model: ForwardModel, x: ComplexImage) -> MulticoilKSpace:
    """Returns the noiseless coil data ``F S_l x``."""
    model.check_image(x.data)
    return MulticoilKSpace(model.op(x.data))


def fidelity(model: ForwardModel, x: ComplexImage, y: MulticoilKSpace) -> float:
    """Returns ``f(x)``."""
    model.check_image(x.data)
    model.check_data(y.coils)
    residual = model.op(x.data) - y.coils
    return 0.5 * float(np.vdot(residual, residual).real)


def grad_f(
    model: ForwardModel, x: ComplexImage, y: MulticoilKSpace
) -> Tuple[ComplexImage, float]:
    """
    Computes the gradient of the data fidelity.

    The gradient is taken over ``(re, im)`` pairs and stored as a complex
    image, so ``f(x + e d) = f(x) + e Re<grad, d> + O(e^2)``.

    Parameters
    ----------
    model : ForwardModel
        The acquisition model.
    x : ComplexImage
        The point of evaluation.
    y : MulticoilKSpace
        The measured data.

    Returns
    -------
    Tuple[ComplexImage, float]
        ``A^H (A x - y)`` and ``f(x)``.
    """
    model.check_image(x.data)
    model.check_data(y.coils)
    residual = model.op(x.data) - y.coils
    value = 0.5 * float(np.vdot(residual, residual).real)
    return ComplexImage(model.adjoint(residual)), value


def zero_filled(model: ForwardModel, y: MulticoilKSpace) -> ComplexImage:
    """
    The density-compensated adjoint reconstruction.

    Computes ``z = sum_l conj(S_l) F^H (W y_l)`` and rescales it by the real
    factor that best fits the data in least squares. On a noiseless, fully
    sampled Cartesian acquisition with unit weights this returns the
    maps-weighted image exactly.
    """
    model.check_data(y.coils)
    z = model.adjoint(y.coils * model.trajectory.density_weights[None, :])
    az = model.op(z)
    energy = float(np.vdot(az, az).real)
    scale = float(np.vdot(az, y.coils).real) / energy if energy > 0 else 1.0
    return ComplexImage(scale * z)
