"""
The Neighbor2Neighbor loss

    L(x) = ||f(g1 x) - g2 x||^2
           + eta * ||f(g1 x) - g2 x - (g1 f(x) - g2 f(x))||^2

and its analytic gradient with respect to the kernel of a SmallDenoiser.
The loss is quadratic in the kernel, so a draw reduces to a few small
Gram matrices.
"""

from typing import Callable, NamedTuple, Sequence, Tuple, Union

import numpy as np

from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import DimensionError, InvalidArgumentError
from pnpmri.n2n.model import SmallDenoiser, patch_matrix
from pnpmri.n2n.split import NeighborSplit, pick

Denoiser = Union[SmallDenoiser, Callable[[np.ndarray], np.ndarray]]


def _check(x: np.ndarray, split: NeighborSplit, eta: float):
    if eta < 0:
        raise InvalidArgumentError(f"eta must be nonnegative, got {eta}")
    if x.shape != split.shape:
        raise DimensionError(f"split for {split.shape} applied to image {x.shape}")


def residuals(
    f: Denoiser, x: np.ndarray, split: NeighborSplit
) -> Tuple[np.ndarray, np.ndarray]:
    """Returns the two residuals whose squared norms make up the loss."""
    first = pick(x, split.first)
    second = pick(x, split.second)
    filtered = f(x)
    fit = f(first) - second
    return fit, fit - (pick(filtered, split.first) - pick(filtered, split.second))


def n2n_loss(f: Denoiser, x: ComplexImage, split: NeighborSplit, eta: float) -> float:
    """
    Evaluates the two-term loss for one image and one split.

    Parameters
    ----------
    f : Denoiser
        A SmallDenoiser or any callable mapping an ``(H, W)`` array to an
        array of the same shape.
    x : ComplexImage
        The noisy image.
    split : NeighborSplit
        The sub-samplers.
    eta : float
        Weight of the regularization term.
    """
    _check(x.data, split, eta)
    fit, consistency = residuals(f, x.data, split)
    return float(np.sum(np.abs(fit) ** 2) + eta * np.sum(np.abs(consistency) ** 2))


class QuadraticTerms(NamedTuple):
    """
    The loss of one (image, split) draw as a quadratic in ``theta``:

        L = constant - 2 Re <linear, theta> + theta^H (fit + eta consistency) theta

    ``cross`` is ``P1^H D``, needed by the stop-gradient field.
    """

    constant: float
    linear: np.ndarray
    fit: np.ndarray
    consistency: np.ndarray
    cross: np.ndarray

    @classmethod
    def mean(cls, terms: Sequence["QuadraticTerms"], weights: Sequence[float]) -> "QuadraticTerms":
        """Weighted mean of several draws, term by term."""
        weights = np.asarray(weights, dtype=np.float64) / len(terms)
        return cls(
            *(
                np.tensordot(weights, np.stack([np.asarray(term[i]) for term in terms]), axes=1)
                for i in range(len(cls._fields))
            )
        )

    def hessian(self, eta: float) -> np.ndarray:
        return self.fit + eta * self.consistency

    def value(self, theta: np.ndarray, eta: float) -> float:
        t = theta.ravel()
        quadratic = np.vdot(t, self.hessian(eta) @ t).real
        return float(self.constant - 2.0 * np.vdot(self.linear, t).real + quadratic)

    def gradient(self, theta: np.ndarray, eta: float, stop_gradient: bool = False) -> np.ndarray:
        """Same convention as :func:`loss_and_grad`."""
        t = theta.ravel()
        if stop_gradient:
            grad = self.fit @ t - self.linear - eta * (self.cross @ t)
        else:
            grad = self.hessian(eta) @ t - self.linear
        return 2.0 * grad.reshape(theta.shape)


def _design(x: np.ndarray, split: NeighborSplit, size: int):
    """``P1`` (patches of g1 x), ``D`` and the target ``g1 x - g2 x``."""
    first = pick(x, split.first)
    second = pick(x, split.second)
    patches_first = patch_matrix(first, size).reshape(-1, size * size)
    patches_full = patch_matrix(x, size)
    # r2 = D theta with D = (g1 - g2) C(x) - C(g1 x)
    mixed = (pick(patches_full, split.first) - pick(patches_full, split.second)).reshape(
        -1, size * size
    ) - patches_first
    return patches_first, mixed, (first - second).ravel()


def quadratic_terms(x: np.ndarray, split: NeighborSplit, kernel_size: int) -> QuadraticTerms:
    """Collects the Gram matrices of one draw; the loss is exactly quadratic."""
    _check(x, split, 0.0)
    patches_first, mixed, target = _design(x, split, kernel_size)
    adjoint = patches_first.conj().T
    return QuadraticTerms(
        constant=float(np.vdot(target, target).real),
        linear=adjoint @ target,
        fit=adjoint @ patches_first,
        consistency=mixed.conj().T @ mixed,
        cross=adjoint @ mixed,
    )


def loss_and_grad(
    model: SmallDenoiser,
    x: np.ndarray,
    split: NeighborSplit,
    eta: float,
    stop_gradient: bool = False,
) -> Tuple[float, np.ndarray]:
    """
    Loss value and its gradient with respect to ``model.theta``.

    The gradient follows the real-pair convention: for a real perturbation
    ``d`` of (re, im) parts, ``dL = Re <grad, d>``. With ``stop_gradient``
    the ``f(x)`` branch of the second term is held constant.
    """
    _check(x, split, eta)
    size = model.kernel_size
    theta = model.theta.ravel()
    patches_first, mixed, target = _design(x, split, size)
    fit = target - patches_first @ theta
    consistency = mixed @ theta
    value = float(np.sum(np.abs(fit) ** 2) + eta * np.sum(np.abs(consistency) ** 2))
    grad = -patches_first.conj().T @ fit
    if stop_gradient:
        grad = grad - eta * (patches_first.conj().T @ consistency)
    else:
        grad = grad + eta * (mixed.conj().T @ consistency)
    return value, 2.0 * grad.reshape(size, size)
