"""
Conjugate gradients for Hermitian positive definite systems, and the
proximal operator of the data fidelity in a preconditioner metric.
"""

from typing import Callable, NamedTuple, Union

import numpy as np

from pnpmri import config
from pnpmri.core.types import ComplexImage, MulticoilKSpace
from pnpmri.exceptions import InvalidArgumentError, SolverError
from pnpmri.kinds import ProxMetric
from pnpmri.logger import logger
from pnpmri.operators.forward_model import ForwardModel
from pnpmri.solve.preconditioners import Preconditioner


class CGResult(NamedTuple):
    solution: np.ndarray
    iterations: int
    converged: bool


def conjugate_gradient(
    apply: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    x0: Union[np.ndarray, None] = None,
    tol: float = config.CG_TOL,
    max_iter: int = config.CG_MAX_ITER,
) -> CGResult:
    """
    Solves ``M u = rhs`` for a Hermitian positive definite ``M``.

    Parameters
    ----------
    apply : callable
        Applies ``M`` to an array shaped like ``rhs``.
    rhs : np.ndarray
        The right-hand side.
    x0 : np.ndarray, optional
        Starting point, zero by default.
    tol : float
        Stop when ``||rhs - M u|| <= tol * ||rhs||``.
    max_iter : int
        Iteration cap.

    Returns
    -------
    CGResult
        The solution, the iterations used and whether ``tol`` was met.
    """
    if not tol > 0:
        raise InvalidArgumentError(f"CG tolerance must be positive, got {tol}")
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=np.complex128, copy=True)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0:
        return CGResult(np.zeros_like(rhs), 0, True)
    threshold = tol * rhs_norm
    r = rhs - apply(x)
    rs = float(np.vdot(r, r).real)
    if np.sqrt(rs) <= threshold:
        return CGResult(x, 0, True)
    p = r.copy()
    for it in range(1, max_iter + 1):
        mp = apply(p)
        curvature = float(np.vdot(p, mp).real)
        if not curvature > 0:
            raise SolverError(f"nonpositive curvature {curvature:.3e} at CG iteration {it}")
        step = rs / curvature
        x += step * p
        r -= step * mp
        rs_new = float(np.vdot(r, r).real)
        if np.sqrt(rs_new) <= threshold:
            return CGResult(x, it, True)
        p = r + (rs_new / rs) * p
        rs = rs_new
    logger.debug("CG stopped at %d iterations, residual %.3e", max_iter, np.sqrt(rs) / rhs_norm)
    return CGResult(x, max_iter, False)


def solve_prox(
    model: ForwardModel,
    y: np.ndarray,
    x: np.ndarray,
    gamma: float,
    metric: Callable[[np.ndarray], np.ndarray],
    tol: float = config.CG_TOL,
    max_iter: int = config.CG_MAX_ITER,
) -> CGResult:
    """
    Array-level ``prox^P_{gamma f}``: solves
    ``(gamma A^H A + P) u = gamma A^H y + P x`` warm-started at ``x``.
    """
    if not gamma > 0:
        raise InvalidArgumentError(f"step size must be positive, got {gamma}")
    rhs = gamma * model.adjoint(y) + metric(x)
    return conjugate_gradient(
        lambda u: gamma * model.normal(u) + metric(u), rhs, x, tol, max_iter
    )


def solve_prox_inverse(
    model: ForwardModel,
    y: np.ndarray,
    x: np.ndarray,
    gamma: float,
    precond: Callable[[np.ndarray], np.ndarray],
    tol: float = config.CG_TOL,
    max_iter: int = config.CG_MAX_ITER,
) -> CGResult:
    """
    Array-level ``prox^{P^{-1}}_{gamma f}``: solves
    ``(I + gamma P A^H A) u = x + gamma P A^H y`` warm-started at ``x``.

    ``P`` is a polynomial in ``A^H A`` so the system is Hermitian, and
    positive definite whenever ``p`` is positive on ``[0, 1]``.
    """
    if not gamma > 0:
        raise InvalidArgumentError(f"step size must be positive, got {gamma}")
    rhs = x + gamma * precond(model.adjoint(y))
    return conjugate_gradient(
        lambda u: u + gamma * precond(model.normal(u)), rhs, x, tol, max_iter
    )


def prox_f_metric(
    model: ForwardModel,
    y: MulticoilKSpace,
    x: ComplexImage,
    gamma: float,
    precond: Preconditioner,
    tol: float = config.CG_TOL,
    max_iter: int = config.CG_MAX_ITER,
    metric: ProxMetric = ProxMetric.DIRECT,
) -> ComplexImage:
    """
    The proximal operator of ``gamma f`` in the metric induced by ``P``:
    ``argmin_u gamma f(u) + 1/2 ||u - x||_P^2``.

    With ``metric=ProxMetric.INVERSE`` the distance is measured in
    ``P^{-1}`` instead, so that ``P`` scales the data step up where it
    exceeds one.

    Returns the CG answer even when ``max_iter`` is hit; solvers record the
    non-convergence in their trace.
    """
    model.check_image(x.data)
    model.check_data(y.coils)
    solve = solve_prox if metric is ProxMetric.DIRECT else solve_prox_inverse
    result = solve(model, y.coils, x.data, gamma, precond.bind(model), tol, max_iter)
    if not result.converged:
        logger.warning("prox CG did not reach tol %g in %d iterations", tol, max_iter)
    return ComplexImage(result.solution)
