"""
Synthetic multicoil acquisitions, sensitivity estimation and virtual coil
combination.
"""

from pnpmri.sim.acquisition import (
    AcquisitionConfig,
    SimulatedCase,
    acquire,
    complex_noise,
    simulate_case,
)
from pnpmri.sim.case_io import read_case, read_meta, write_case
from pnpmri.sim.coils import estimate_smaps, make_coil_maps
from pnpmri.sim.combine import coil_images, root_sum_of_squares, virtual_coil_combine
from pnpmri.sim.phantom import make_phantom
from pnpmri.sim.trajectory import make_cartesian, make_spiral

__all__ = [
    "AcquisitionConfig",
    "SimulatedCase",
    "acquire",
    "coil_images",
    "complex_noise",
    "estimate_smaps",
    "make_cartesian",
    "make_coil_maps",
    "make_phantom",
    "make_spiral",
    "read_case",
    "read_meta",
    "root_sum_of_squares",
    "simulate_case",
    "virtual_coil_combine",
    "write_case",
]
