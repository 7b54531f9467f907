"""
Domain types and complex-array containers shared by the whole library.

Images use row-major ``(row=y, col=x)`` indexing everywhere, in memory and on
disk.
"""

from pnpmri.core.cimg import read_cimg, write_cimg, write_pgm
from pnpmri.core.linalg import image_norm, weighted_inner_product
from pnpmri.core.types import (
    ComplexImage,
    MulticoilKSpace,
    SensitivityMaps,
    SolverTrace,
    TraceEntry,
    Trajectory,
)

__all__ = [
    "ComplexImage",
    "MulticoilKSpace",
    "SensitivityMaps",
    "SolverTrace",
    "TraceEntry",
    "Trajectory",
    "image_norm",
    "weighted_inner_product",
    "read_cimg",
    "write_cimg",
    "write_pgm",
]
