"""
Power iteration for the largest eigenvalue of ``A^H A``.
"""

from typing import List, NamedTuple

import numpy as np

from pnpmri.exceptions import EstimationError, InvalidArgumentError
from pnpmri.logger import logger
from pnpmri.operators.forward_model import ForwardModel


class PowerIterationResult(NamedTuple):
    """Outcome of a power iteration run."""

    value: float
    rel_change: float
    rayleigh: List[float]


def power_iteration(model: ForwardModel, iters: int, seed: int) -> PowerIterationResult:
    """
    Runs power iteration on ``A^H A`` from a seeded random start.

    The Rayleigh quotients of a positive semidefinite operator along the
    power sequence are nondecreasing; the last one is the estimate.

    Parameters
    ----------
    model : ForwardModel
        The acquisition model.
    iters : int
        Number of iterations, at least 1.
    seed : int
        Seed of the random start vector.

    Returns
    -------
    PowerIterationResult
        The estimate, the relative change between the last two quotients
        and the full quotient history.
    """
    if iters < 1:
        raise InvalidArgumentError(f"power iteration needs iters >= 1, got {iters}")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(model.shape) + 1j * rng.standard_normal(model.shape)
    vec /= np.linalg.norm(vec)
    rayleigh: List[float] = []
    for _ in range(iters):
        image = model.normal(vec)
        rayleigh.append(float(np.vdot(vec, image).real))
        norm = np.linalg.norm(image)
        if norm == 0:
            break
        vec = image / norm
    rel_change = 0.0
    if len(rayleigh) > 1 and rayleigh[-1] > 0:
        rel_change = abs(rayleigh[-1] - rayleigh[-2]) / rayleigh[-1]
    return PowerIterationResult(rayleigh[-1], rel_change, rayleigh)


def estimate_operator_norm(model: ForwardModel, iters: int, seed: int) -> float:
    """
    Returns the power-iteration estimate of ``lambda_max(A^H A)``.

    Raises EstimationError when the estimate is not positive, as for a
    model whose maps are zero.
    """
    result = power_iteration(model, iters, seed)
    logger.info(
        "Operator norm estimate %.6g after %d iterations (relative change %.2e)",
        result.value,
        len(result.rayleigh),
        result.rel_change,
    )
    if not result.value > 0:
        raise EstimationError(
            f"the normal operator vanished on the power sequence (estimate {result.value:g})"
        )
    return result.value
