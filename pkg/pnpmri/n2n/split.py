"""
Neighbor sub-samplers ``g1`` and ``g2``.

The image is tiled in 2x2 cells; in every cell ``g1`` keeps one pixel and
``g2`` a different one, so both sub-images have half the resolution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import DimensionError, InvalidArgumentError

# Cell positions are numbered row-major: 0 = (0, 0), 1 = (0, 1), 2 = (1, 0), 3 = (1, 1).
ORDERED_PAIRS = np.array(
    [pair for pair in itertools.product(range(4), repeat=2) if pair[0] != pair[1]],
    dtype=np.intp,
)


def _check_even(shape: Tuple[int, ...]):
    if len(shape) < 2 or shape[0] % 2 or shape[1] % 2:
        raise InvalidArgumentError(f"neighbor sub-sampling needs even sides, got {shape[:2]}")


@dataclass(frozen=True)
class NeighborSplit:
    """
    One draw of the sub-samplers.

    Attributes
    ----------
    first : np.ndarray
        ``(H/2, W/2)`` cell positions picked by ``g1``.
    second : np.ndarray
        ``(H/2, W/2)`` cell positions picked by ``g2``, never equal to ``first``.
    seed : int
        The seed the split was drawn with.
    """

    first: np.ndarray
    second: np.ndarray
    seed: int

    @classmethod
    def draw(cls, shape: Tuple[int, int], seed) -> NeighborSplit:
        """
        Draws a split for images of ``shape``.

        ``seed`` may be an int or a ``np.random.Generator``; a generator is
        advanced and the split records ``-1`` as its seed.
        """
        _check_even(shape)
        if isinstance(seed, np.random.Generator):
            rng, recorded = seed, -1
        else:
            rng, recorded = np.random.default_rng(seed), int(seed)
        cells = (shape[0] // 2, shape[1] // 2)
        choice = rng.integers(0, len(ORDERED_PAIRS), size=cells)
        pairs = ORDERED_PAIRS[choice]
        first, second = pairs[..., 0].copy(), pairs[..., 1].copy()
        first.flags.writeable = False
        second.flags.writeable = False
        return cls(first, second, recorded)

    @property
    def shape(self) -> Tuple[int, int]:
        """Shape of the full-resolution images the split applies to."""
        return (2 * self.first.shape[0], 2 * self.first.shape[1])


def pick(data: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """
    Keeps one pixel per 2x2 cell of the leading two axes of ``data``.
    Trailing axes are carried along.
    """
    _check_even(data.shape)
    height, width = data.shape[0] // 2, data.shape[1] // 2
    if positions.shape != (height, width):
        raise DimensionError(f"split of cells {positions.shape} for data {data.shape[:2]}")
    rest = data.shape[2:]
    cells = data.reshape(height, 2, width, 2, *rest).swapaxes(1, 2)
    cells = cells.reshape(height, width, 4, *rest)
    index = positions.reshape(height, width, 1, *([1] * len(rest)))
    return np.take_along_axis(cells, index, axis=2)[:, :, 0]


def neighbor_subsample(
    x: ComplexImage, split: NeighborSplit
) -> Tuple[ComplexImage, ComplexImage]:
    """Applies ``g1`` and ``g2`` to an image."""
    if x.shape != split.shape:
        raise DimensionError(f"split for {split.shape} applied to image {x.shape}")
    return ComplexImage(pick(x.data, split.first)), ComplexImage(pick(x.data, split.second))
