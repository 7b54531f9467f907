"""
The convex functions ``g`` behind built-in denoisers (``D = prox_g``),
their Moreau envelopes and subdifferentials, used by optimality oracles.
"""

import numpy as np

from pnpmri.exceptions import InvalidArgumentError
from pnpmri.kinds import DenoiserKind
from pnpmri.priors import wavelet as wt
from pnpmri.priors.denoisers import DenoiserSpec, denoise_array

_ZERO_TOL = 1e-10


def _check_builtin(spec: DenoiserSpec):
    if spec.kind is DenoiserKind.EXTERNAL:
        raise InvalidArgumentError("the external denoiser has no known regularizer")


def regularizer_value(spec: DenoiserSpec, x: np.ndarray, sigma: float) -> float:
    """Evaluates ``g`` such that ``D_sigma = prox_g``."""
    _check_builtin(spec)
    tau = spec.threshold(sigma)
    if spec.kind is DenoiserKind.IDENTITY or tau == 0:
        return 0.0
    if spec.kind is DenoiserKind.SOFT_THRESHOLD:
        return tau * float(np.sum(np.abs(x)))
    coeffs, slices = wt.analysis(x, spec.wavelet, spec.levels)
    return tau * float(np.sum(np.abs(coeffs[wt.detail_mask(coeffs.shape, slices)])))


def moreau_envelope(spec: DenoiserSpec, u: np.ndarray, sigma: float) -> float:
    """Evaluates ``1g(u) = g(p) + 1/2 ||u - p||^2`` with ``p = prox_g(u)``."""
    prox = denoise_array(spec, u, sigma)
    return regularizer_value(spec, prox, sigma) + 0.5 * float(np.sum(np.abs(u - prox) ** 2))


def _l1_distance(coeffs: np.ndarray, vec: np.ndarray, tau: float) -> np.ndarray:
    """Pointwise distance from ``vec`` to the subdifferential of ``tau |.|``."""
    modulus = np.abs(coeffs)
    scale = max(1.0, float(modulus.max(initial=0.0)))
    active = modulus > _ZERO_TOL * scale
    direction = np.where(active, coeffs / np.where(active, modulus, 1.0), 0.0)
    return np.where(
        active, np.abs(vec - tau * direction), np.maximum(np.abs(vec) - tau, 0.0)
    )


def subgradient_distance(
    spec: DenoiserSpec, sigma: float, x: np.ndarray, v: np.ndarray
) -> float:
    """
    Distance from ``v`` to the subdifferential of ``g`` at ``x``.

    Zero exactly when ``v`` is a subgradient; the wavelet case is evaluated
    in coefficient space, where the orthonormal transform preserves
    distances.
    """
    _check_builtin(spec)
    tau = spec.threshold(sigma)
    if spec.kind is DenoiserKind.IDENTITY or tau == 0:
        return float(np.linalg.norm(v))
    if spec.kind is DenoiserKind.SOFT_THRESHOLD:
        return float(np.linalg.norm(_l1_distance(x, v, tau)))
    cx, slices = wt.analysis(x, spec.wavelet, spec.levels)
    cv, _ = wt.analysis(v, spec.wavelet, spec.levels)
    details = wt.detail_mask(cx.shape, slices)
    dist = np.where(details, _l1_distance(cx, cv, tau), np.abs(cv))
    return float(np.linalg.norm(dist))
