"""
Coil sensitivity simulation and estimation from the k-space center.
"""

from typing import Tuple, Union

import numpy as np
from scipy.signal import windows

from pnpmri import config
from pnpmri.core.types import MulticoilKSpace, SensitivityMaps, Trajectory
from pnpmri.exceptions import DimensionError, EstimationError, InvalidArgumentError
from pnpmri.logger import logger
from pnpmri.operators.ndft import NDFTPlan
from pnpmri.sim.phantom import unit_grid

_TAPER_POINTS = 1025


def make_coil_maps(
    shape: Tuple[int, int],
    n_coils: int,
    seed: int,
    mask: Union[np.ndarray, None] = None,
) -> SensitivityMaps:
    """
    Simulates smooth complex coil profiles.

    Each coil is a Gaussian lobe centered on a ring around the field of view
    with a linear phase ramp and a random phase offset. The maps are masked
    to the region of interest and scaled so that ``max sum_l |S_l|^2 = 1``.

    Parameters
    ----------
    shape : Tuple[int, int]
        Image shape.
    n_coils : int
        Number of coils ``L >= 1``.
    seed : int
        Seed of the ring rotation and phase offsets.
    mask : np.ndarray, optional
        Region of interest; the full field of view by default.
    """
    if n_coils < 1:
        raise InvalidArgumentError(f"need at least one coil, got {n_coils}")
    if mask is None:
        mask = np.ones(shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != tuple(shape):
        raise DimensionError(f"mask shape {mask.shape} vs {shape}")
    rng = np.random.default_rng(seed)
    x, y = unit_grid(shape)
    # unit_grid spans [-1, 1]; the ring radius and width are in FOV units
    ring, width = 2.0 * config.COIL_RING_RADIUS, 2.0 * config.COIL_LOBE_WIDTH
    rotation = rng.uniform(0.0, 2.0 * np.pi)
    offsets = rng.uniform(0.0, 2.0 * np.pi, size=n_coils)
    maps = np.empty((n_coils,) + tuple(shape), dtype=np.complex128)
    for coil in range(n_coils):
        angle = rotation + 2.0 * np.pi * coil / n_coils
        cx, cy = ring * np.cos(angle), ring * np.sin(angle)
        dist2 = (x - cx) ** 2 + (y - cy) ** 2
        ramp = 0.5 * np.pi * (x * np.cos(angle) + y * np.sin(angle))
        maps[coil] = np.exp(-dist2 / (2.0 * width**2)) * np.exp(1j * (offsets[coil] + ramp))
    maps = np.where(mask, maps, 0)
    peak = np.max(np.sum(np.abs(maps) ** 2, axis=0))
    if peak > 0:
        maps /= np.sqrt(peak)
    return SensitivityMaps(maps, mask)


def hamming_taper(radius: np.ndarray, cutoff: float) -> np.ndarray:
    """
    Radial Hamming window, 1 at the origin and 0.08 at ``cutoff``: the
    right half of a symmetric ``scipy.signal.windows.hamming`` window,
    interpolated at ``radius / cutoff``.
    """
    half = windows.hamming(2 * _TAPER_POINTS - 1, sym=True)[_TAPER_POINTS - 1 :]
    ratio = np.minimum(radius / cutoff, 1.0)
    return np.interp(ratio, np.linspace(0.0, 1.0, _TAPER_POINTS), half)


def estimate_smaps(
    y: MulticoilKSpace,
    traj: Trajectory,
    shape: Tuple[int, int],
    window: int = config.SMAP_WINDOW,
    mask: Union[np.ndarray, None] = None,
) -> SensitivityMaps:
    """
    Estimates sensitivity maps from the central k-space samples.

    Samples with ``||k||_inf < window / (2 max(H, W))`` are tapered by a
    radial Hamming window and density-compensated before the adjoint NDFT.
    Each low-resolution coil image is divided by the root sum of squares.

    Parameters
    ----------
    y : MulticoilKSpace
        The acquired data.
    traj : Trajectory
        The sampling locations of ``y``.
    shape : Tuple[int, int]
        Image shape.
    window : int
        Width of the central window in Cartesian pixels.
    mask : np.ndarray, optional
        Support to restrict the maps to; by default the pixels whose
        root-sum-of-squares exceeds ``config.SMAP_THRESHOLD`` of its maximum.
    """
    if y.n_samples != len(traj):
        raise DimensionError(f"{y.n_samples} samples for {len(traj)} points")
    cutoff = window / (2.0 * max(shape))
    keep = np.max(np.abs(traj.points), axis=1) < cutoff
    if not np.any(keep):
        raise EstimationError(
            f"sensitivity maps: no sample inside the central window |k| < {cutoff:.4g}"
        )
    center = Trajectory(traj.points[keep], traj.density_weights[keep])
    radius = np.hypot(center.kx, center.ky)
    weights = center.density_weights * hamming_taper(radius, cutoff)
    low_res = NDFTPlan(center, shape).adjoint(y.coils[:, keep] * weights[None, :])
    power = np.sum(np.abs(low_res) ** 2, axis=0)
    eps = config.SMAP_EPS * np.max(np.abs(low_res) ** 2)
    maps = low_res / np.sqrt(power + eps)
    if mask is None:
        rss = np.sqrt(power)
        mask = rss > config.SMAP_THRESHOLD * rss.max()
    logger.debug("Estimated %d maps from %d central samples", y.n_coils, int(keep.sum()))
    return SensitivityMaps.masked(maps, mask)
