"""
Simulated multicoil spiral acquisition.
"""

from __future__ import annotations

from typing import NamedTuple, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from pnpmri import config
from pnpmri.core.types import ComplexImage, MulticoilKSpace, SensitivityMaps, Trajectory
from pnpmri.exceptions import DimensionError
from pnpmri.logger import logger
from pnpmri.operators.ndft import NDFTPlan
from pnpmri.sim.coils import make_coil_maps
from pnpmri.sim.phantom import make_phantom
from pnpmri.sim.trajectory import make_spiral


class AcquisitionConfig(BaseModel):
    """
    Parameters of a simulated acquisition.

    The acceleration factor is measured against the fully sampled Cartesian
    count, so ``M = round(H W / af)``. Shots hold ``ceil(M / shots)``
    samples; when that overshoots ``M`` the last shots drop their outermost
    sample.
    The seed fixes every random draw.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: Tuple[int, int] = (64, 64)
    coils: int = Field(default=4, ge=1)
    af: float = Field(default=4.0, ge=1.0)
    shots: int = Field(default=16, ge=1)
    samples_per_shot: Union[int, None] = Field(default=None, ge=2)
    noise_scale: float = Field(default=config.DEFAULT_NOISE_SCALE, ge=0.0)
    seed: int = Field(default=0, ge=0)

    @property
    def n_samples(self) -> int:
        """Total samples ``M`` per coil."""
        return int(round(self.shape[0] * self.shape[1] / self.af))

    @property
    def shot_length(self) -> int:
        """Samples per interleave."""
        if self.samples_per_shot is not None:
            return self.samples_per_shot
        return -(-self.n_samples // self.shots)

    @model_validator(mode="after")
    def _check_sample_budget(self) -> AcquisitionConfig:
        excess = self.shots * self.shot_length - self.n_samples
        if not 0 <= excess < self.shots:
            raise ValueError(
                f"shots ({self.shots}) x samples per shot ({self.shot_length}) "
                f"must cover round(H W / af) = {self.n_samples} with less than one sample "
                "to spare per shot"
            )
        if self.shot_length < 2:
            raise ValueError("each shot needs at least two samples")
        return self

    def trajectory(self) -> Trajectory:
        """The spiral described by this configuration, ``M`` points long."""
        length = self.shot_length
        spiral = make_spiral(self.shape, self.shots, length)
        excess = self.shots * length - self.n_samples
        if excess == 0:
            return spiral
        keep = np.ones(self.shots * length, dtype=bool)
        keep[(np.arange(self.shots - excess, self.shots) + 1) * length - 1] = False
        weights = spiral.density_weights[keep]
        return Trajectory(spiral.points[keep], weights / weights.mean())


def complex_noise(seed: int, coil: int, n_samples: int) -> np.ndarray:
    """
    Unit-variance circular complex Gaussian noise for one coil.

    Draws come from a Philox counter-based generator keyed by
    ``(seed, coil)``; sample ``m`` always consumes the ``m``-th pair of
    uniforms, which a Box-Muller transform turns into ``re`` and ``im``
    parts of variance 1/2 each.
    """
    key = np.array([seed, coil], dtype=np.uint64)
    uniforms = np.random.Generator(np.random.Philox(key=key)).random((n_samples, 2))
    radius = np.sqrt(-2.0 * np.log1p(-uniforms[:, 0]))
    return radius * np.exp(2j * np.pi * uniforms[:, 1]) / np.sqrt(2.0)


def acquire(
    cfg: AcquisitionConfig, x: ComplexImage, smaps: SensitivityMaps
) -> MulticoilKSpace:
    """
    Simulates ``y_l = F S_l x + e_l``.

    The noise variance is ``nu = noise_scale * max_p sum_l |S_l x|^2``.

    Parameters
    ----------
    cfg : AcquisitionConfig
        Acquisition parameters.
    x : ComplexImage
        The ground-truth image.
    smaps : SensitivityMaps
        Coil sensitivities, same shape as ``x``.
    """
    if x.shape != smaps.shape or x.shape != tuple(cfg.shape):
        raise DimensionError(f"image {x.shape}, maps {smaps.shape}, config {cfg.shape}")
    coil_images = smaps.maps * x.data
    plan = NDFTPlan(cfg.trajectory(), x.shape)
    clean = plan.forward(coil_images)
    variance = cfg.noise_scale * float(np.max(np.sum(np.abs(coil_images) ** 2, axis=0)))
    if variance > 0:
        noise = np.stack(
            [complex_noise(cfg.seed, coil, plan.n_samples) for coil in range(smaps.n_coils)]
        )
        clean = clean + np.sqrt(variance) * noise
    return MulticoilKSpace(clean, variance)


class SimulatedCase(NamedTuple):
    """Everything a simulated acquisition produces."""

    phantom: ComplexImage
    mask: np.ndarray
    smaps: SensitivityMaps
    trajectory: Trajectory
    kspace: MulticoilKSpace


def simulate_case(cfg: AcquisitionConfig) -> SimulatedCase:
    """Builds phantom, coil maps and noisy spiral data from one config."""
    phantom, mask = make_phantom(cfg.shape, cfg.seed)
    smaps = make_coil_maps(cfg.shape, cfg.coils, cfg.seed, mask)
    kspace = acquire(cfg, phantom, smaps)
    logger.info(
        "Simulated %dx%d phantom, %d coils, AF=%g (%d samples/coil, noise variance %.3g)",
        cfg.shape[0],
        cfg.shape[1],
        cfg.coils,
        cfg.af,
        cfg.n_samples,
        kspace.noise_variance,
    )
    return SimulatedCase(phantom, mask, smaps, cfg.trajectory(), kspace)
