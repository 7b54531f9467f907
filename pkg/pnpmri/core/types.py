"""
Immutable containers for images, trajectories, k-space data and sensitivity
maps, plus the per-iteration solver trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Tuple, Union

import numpy as np

from pnpmri.exceptions import DimensionError, InvalidArgumentError


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _check_finite(arr: np.ndarray, what: str):
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{what} contains NaN or Inf values")


@dataclass(frozen=True)
class ComplexImage:
    """
    A 2-D grid of complex double-precision samples.

    Parameters
    ----------
    data : np.ndarray
        A ``(height, width)`` array. It is copied and made read-only.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise DimensionError(f"an image must be 2-D, got {arr.ndim}-D")
        arr = arr.astype(np.complex128)
        _check_finite(arr, "image")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def height(self) -> int:
        """Number of rows."""
        return self.data.shape[0]

    @property
    def width(self) -> int:
        """Number of columns."""
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        """The ``(height, width)`` pair."""
        return self.data.shape[0], self.data.shape[1]

    @classmethod
    def zeros(cls, shape: Tuple[int, int]) -> ComplexImage:
        """Builds an all-zero image."""
        return cls(np.zeros(shape, dtype=np.complex128))

    def magnitude(self) -> np.ndarray:
        """Returns the pixelwise modulus."""
        return np.abs(self.data)


@dataclass(frozen=True)
class Trajectory:
    """
    Normalized k-space sample locations with density compensation weights.

    Parameters
    ----------
    points : np.ndarray
        An ``(M, 2)`` array of ``(kx, ky)`` pairs in cycles/pixel, each
        coordinate in ``[-0.5, 0.5)``. ``kx`` pairs with columns and ``ky``
        with rows.
    density_weights : np.ndarray
        ``M`` strictly positive weights.
    """

    points: np.ndarray
    density_weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        weights = np.asarray(self.density_weights, dtype=np.float64).ravel()
        if weights.shape[0] != points.shape[0]:
            raise DimensionError(
                f"{points.shape[0]} points but {weights.shape[0]} density weights"
            )
        _check_finite(points, "trajectory")
        _check_finite(weights, "density weights")
        if np.any(points < -0.5) or np.any(points >= 0.5):
            raise InvalidArgumentError("k-space coordinates must lie in [-0.5, 0.5)")
        if np.any(weights <= 0):
            raise InvalidArgumentError("density weights must be strictly positive")
        object.__setattr__(self, "points", _frozen(points))
        object.__setattr__(self, "density_weights", _frozen(weights))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def kx(self) -> np.ndarray:
        """Horizontal frequencies."""
        return self.points[:, 0]

    @property
    def ky(self) -> np.ndarray:
        """Vertical frequencies."""
        return self.points[:, 1]


@dataclass(frozen=True)
class MulticoilKSpace:
    """
    Per-coil measurement vectors.

    Parameters
    ----------
    coils : np.ndarray
        An ``(L, M)`` complex array, one row per coil.
    noise_variance : float
        The complex noise variance the data was acquired with.
    """

    coils: np.ndarray
    noise_variance: float = 0.0

    def __post_init__(self):
        coils = np.asarray(self.coils)
        if coils.ndim == 1:
            coils = coils[None, :]
        if coils.ndim != 2 or coils.shape[0] < 1:
            raise DimensionError("k-space data must hold at least one coil vector")
        coils = coils.astype(np.complex128)
        _check_finite(coils, "k-space data")
        if not np.isfinite(self.noise_variance) or self.noise_variance < 0:
            raise InvalidArgumentError("noise variance must be finite and nonnegative")
        object.__setattr__(self, "coils", _frozen(coils))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def n_coils(self) -> int:
        """Number of coils ``L``."""
        return self.coils.shape[0]

    @property
    def n_samples(self) -> int:
        """Samples per coil ``M``."""
        return self.coils.shape[1]


@dataclass(frozen=True)
class SensitivityMaps:
    """
    Complex coil profiles sharing a support mask.

    Parameters
    ----------
    maps : np.ndarray
        An ``(L, H, W)`` complex array.
    support_mask : np.ndarray
        An ``(H, W)`` boolean array; maps must vanish where it is false.
    """

    maps: np.ndarray
    support_mask: np.ndarray

    def __post_init__(self):
        maps = np.asarray(self.maps)
        if maps.ndim == 2:
            maps = maps[None]
        mask = np.asarray(self.support_mask, dtype=bool)
        if maps.ndim != 3 or maps.shape[0] < 1:
            raise DimensionError("sensitivity maps must be an (L, H, W) stack")
        if maps.shape[1:] != mask.shape:
            raise DimensionError(
                f"maps of shape {maps.shape[1:]} do not match mask {mask.shape}"
            )
        maps = maps.astype(np.complex128)
        _check_finite(maps, "sensitivity maps")
        if np.any(maps[:, ~mask] != 0):
            raise InvalidArgumentError("sensitivity maps must vanish outside the mask")
        object.__setattr__(self, "maps", _frozen(maps))
        object.__setattr__(self, "support_mask", _frozen(mask))

    @classmethod
    def masked(cls, maps: np.ndarray, support_mask: np.ndarray) -> SensitivityMaps:
        """Zeroes the maps outside the mask before building the container."""
        mask = np.asarray(support_mask, dtype=bool)
        return cls(np.where(mask, maps, 0), mask)

    @property
    def n_coils(self) -> int:
        """Number of coils ``L``."""
        return self.maps.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        """Image shape ``(H, W)``."""
        return self.maps.shape[1], self.maps.shape[2]

    def coil(self, index: int) -> ComplexImage:
        """Returns one coil profile as an image."""
        return ComplexImage(self.maps[index])

    def sum_of_squares(self) -> np.ndarray:
        """Pixelwise ``sum_l |S_l|^2``."""
        return np.sum(np.abs(self.maps) ** 2, axis=0)


@dataclass(frozen=True)
class TraceEntry:
    """One solver iteration."""

    k: int
    gamma: float
    sigma: float
    fidelity: float
    dx: float
    psnr: Union[float, None] = None
    ssim: Union[float, None] = None
    objective: Union[float, None] = None
    cg_iterations: Union[int, None] = None
    cg_converged: bool = True


@dataclass
class SolverTrace:
    """
    The ordered record of a solver run.

    Entries are appended by the owning solver only; ``k`` must increase
    strictly, ``gamma`` must be positive and ``sigma`` nonnegative.
    """

    entries: List[TraceEntry] = field(default_factory=list)

    def append(self, entry: TraceEntry):
        """
        Records an iteration.

        Parameters
        ----------
        entry : TraceEntry
            The iteration to record.
        """
        if self.entries and entry.k <= self.entries[-1].k:
            raise InvalidArgumentError(
                f"trace index {entry.k} does not follow {self.entries[-1].k}"
            )
        if not entry.gamma > 0:
            raise InvalidArgumentError(f"step size must be positive, got {entry.gamma}")
        if entry.sigma < 0:
            raise InvalidArgumentError(f"noise level must be nonnegative, got {entry.sigma}")
        self.entries.append(entry)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TraceEntry]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> TraceEntry:
        return self.entries[index]

    @property
    def cg_failures(self) -> int:
        """Number of iterations whose inner solve hit its iteration cap."""
        return sum(1 for entry in self.entries if not entry.cg_converged)

    def column(self, name: str) -> np.ndarray:
        """Returns one field over all entries as a float array (None → NaN)."""
        values = [getattr(entry, name) for entry in self.entries]
        return np.array([np.nan if v is None else v for v in values], dtype=np.float64)
