"""
Validated solver configurations.
"""

from __future__ import annotations

from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from pnpmri import config
from pnpmri.kinds import Algorithm, PreconditionerKind, ProxMetric
from pnpmri.priors.denoisers import DenoiserSpec


class AnnealingSchedule(BaseModel):
    """
    Log-uniform decay ``sigma_k = sigma0 * xi**k`` over ``iterations``
    steps, ending at ``sigma_min``, with steps ``gamma_k = lambda_reg *
    sigma_k`` expressed in units of ``1 / lambda_max(A^H A)``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma0: float = Field(gt=0.0)
    sigma_min: float = Field(gt=0.0)
    iterations: int = Field(default=config.N_ITER, ge=2)
    lambda_reg: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _decreasing(self) -> AnnealingSchedule:
        if not self.sigma_min < self.sigma0:
            raise ValueError(
                f"sigma_min ({self.sigma_min}) must be below sigma0 ({self.sigma0})"
            )
        return self

    @property
    def xi(self) -> float:
        return (self.sigma_min / self.sigma0) ** (1.0 / (self.iterations - 1))

    def sigmas(self) -> np.ndarray:
        """All noise levels; the endpoints are exact."""
        sigmas = self.sigma0 * self.xi ** np.arange(self.iterations, dtype=np.float64)
        sigmas[0] = self.sigma0
        sigmas[-1] = self.sigma_min
        return sigmas

    def gammas(self, lam_max: float) -> np.ndarray:
        """Raw step sizes for a model with operator norm ``lam_max``."""
        return self.lambda_reg * self.sigmas() / lam_max


class SolverConfig(BaseModel):
    """
    One reconstruction run.

    PnP solvers take either a ``schedule`` or fixed ``sigma`` together
    with a step, given raw (``gamma``) or in units of ``1 / lambda_max``
    (``gamma_scale``). The FISTA baseline uses ``lambda_reg`` as the
    wavelet-l1 weight and ``gamma_scale`` (default 1) for its step.
    ``prox_metric`` picks the metric of the HQS data step.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = ""
    algorithm: Algorithm
    preconditioner: PreconditionerKind = PreconditionerKind.IDENTITY
    alpha: float = Field(default=config.F1_ALPHA, gt=0.0)
    prox_metric: ProxMetric = ProxMetric.DIRECT
    denoiser: DenoiserSpec = Field(default_factory=DenoiserSpec)
    sigma: Union[float, None] = Field(default=None, ge=0.0)
    gamma: Union[float, None] = Field(default=None, gt=0.0)
    gamma_scale: Union[float, None] = Field(default=None, gt=0.0)
    schedule: Union[AnnealingSchedule, None] = None
    lambda_reg: float = Field(default=0.0, ge=0.0)
    cg_tol: float = Field(default=config.CG_TOL, gt=0.0)
    cg_max_iter: int = Field(default=config.CG_MAX_ITER, ge=1)
    n_iter: int = Field(default=config.N_ITER, ge=1)
    early_stop: bool = True
    init: Literal["adjoint", "zeros"] = "adjoint"
    accelerate: bool = True

    @model_validator(mode="after")
    def _parameters(self) -> SolverConfig:
        if self.gamma is not None and self.gamma_scale is not None:
            raise ValueError("give either gamma or gamma_scale, not both")
        if self.algorithm is Algorithm.FISTA_WAVELET or self.schedule is not None:
            return self
        if self.sigma is None or (self.gamma is None and self.gamma_scale is None):
            raise ValueError(
                f"{self.algorithm.value} needs a schedule or fixed sigma and gamma/gamma_scale"
            )
        return self

    @property
    def label(self) -> str:
        """The run name, defaulting to algorithm and preconditioner."""
        return self.name or f"{self.algorithm.value}-{self.preconditioner.value}"

    @property
    def iterations(self) -> int:
        """Outer iteration budget ``K``."""
        return self.schedule.iterations if self.schedule is not None else self.n_iter

    def parameters(self, lam_max: float):
        """
        Returns the per-iteration ``(gammas, sigmas)`` arrays, raw units.
        """
        if self.schedule is not None:
            return self.schedule.gammas(lam_max), self.schedule.sigmas()
        if self.gamma is not None:
            gamma = self.gamma
        else:
            scale = 1.0 if self.gamma_scale is None else self.gamma_scale
            gamma = scale / lam_max
        sigma = 0.0 if self.sigma is None else self.sigma
        return np.full(self.n_iter, gamma), np.full(self.n_iter, sigma)
