"""
Polynomial preconditioners ``P = p(A^H A / lambda_max)``.

The normalized operator has its spectrum in ``[0, 1]``, where

    identity  : p(l) = 1
    f1        : p(l) = 2 - alpha * l
    chebyshev : p(l) = 4 - 10/3 * l

and one preconditioned gradient step damps the component at ``l`` by
``|1 - p(l) * l|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from pnpmri import config
from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import InvalidArgumentError
from pnpmri.kinds import PreconditionerKind
from pnpmri.operators.forward_model import ForwardModel

ArrayOp = Callable[[np.ndarray], np.ndarray]


def _coefficients(kind: PreconditionerKind, alpha: float):
    """Returns ``(c0, c1)`` with ``p(l) = c0 - c1 * l``."""
    if kind is PreconditionerKind.IDENTITY:
        return 1.0, 0.0
    if kind is PreconditionerKind.F1:
        return 2.0, alpha
    return config.CHEBYSHEV_C0, config.CHEBYSHEV_C1


@dataclass(frozen=True)
class Preconditioner:
    """
    A preconditioner kind with its parameters.

    Attributes
    ----------
    kind : PreconditionerKind
        The polynomial family.
    alpha : float
        The F-1 weight, ignored by the other kinds.
    lam_max : float
        ``lambda_max(A^H A)`` of the model the preconditioner is applied to.
    """

    kind: PreconditionerKind = PreconditionerKind.IDENTITY
    alpha: float = config.F1_ALPHA
    lam_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PreconditionerKind(self.kind))
        if not self.alpha > 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")
        if not self.lam_max > 0:
            raise InvalidArgumentError(f"lambda_max must be positive, got {self.lam_max}")

    @classmethod
    def for_model(
        cls, kind: PreconditionerKind, model: ForwardModel, alpha: float = config.F1_ALPHA
    ) -> Preconditioner:
        """Builds a preconditioner normalized by the model operator norm."""
        return cls(PreconditionerKind(kind), alpha, model.lipschitz())

    def polynomial(self, lam):
        """Evaluates ``p`` on normalized eigenvalues."""
        c0, c1 = _coefficients(self.kind, self.alpha)
        return c0 - c1 * np.asarray(lam, dtype=np.float64)

    def bind(self, model: ForwardModel) -> ArrayOp:
        """Returns ``P`` as an operator on ``(H, W)`` arrays."""
        c0, c1 = _coefficients(self.kind, self.alpha)
        if c1 == 0.0:
            return lambda v: c0 * v
        scale = c1 / self.lam_max
        return lambda v: c0 * v - scale * model.normal(v)


def apply_preconditioner(
    precond: Preconditioner, model: ForwardModel, v: ComplexImage
) -> ComplexImage:
    """Applies ``P`` to an image."""
    model.check_image(v.data)
    return ComplexImage(precond.bind(model)(v.data))


def spectral_radius_scan(
    kind: PreconditionerKind, alpha: float, grid: Iterable[float]
) -> float:
    """
    Maximum of ``|1 - p(l) * l|`` over a grid of normalized eigenvalues.

    Parameters
    ----------
    kind : PreconditionerKind
        The polynomial family.
    alpha : float
        The F-1 weight.
    grid : Iterable[float]
        Eigenvalues in ``[0, 1]``.
    """
    lam = np.asarray(list(grid), dtype=np.float64)
    if lam.size == 0:
        raise InvalidArgumentError("the spectrum grid is empty")
    precond = Preconditioner(PreconditionerKind(kind), alpha)
    return float(np.max(np.abs(1.0 - precond.polynomial(lam) * lam)))
