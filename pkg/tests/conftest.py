"""
Shared fixtures: small random models, Cartesian models and image factories.
"""

import numpy as np
import pytest

from pnpmri.core.types import SensitivityMaps, Trajectory
from pnpmri.operators.forward_model import ForwardModel
from pnpmri.sim.trajectory import make_cartesian


def random_image(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_trajectory(rng, n_samples):
    points = rng.uniform(-0.5, 0.5, size=(n_samples, 2))
    return Trajectory(points, rng.uniform(0.5, 1.5, size=n_samples))


def random_maps(rng, shape, n_coils):
    return SensitivityMaps(random_image(rng, (n_coils,) + tuple(shape)), np.ones(shape, dtype=bool))


def well_conditioned_maps(rng, shape, n_coils):
    """Maps with ``sum_l |S_l|^2`` between roughly 0.5 and 4.5 everywhere."""
    modulus = rng.uniform(0.5, 1.5, size=(n_coils,) + tuple(shape))
    phase = np.exp(2j * np.pi * rng.uniform(size=(n_coils,) + tuple(shape)))
    return SensitivityMaps(modulus * phase, np.ones(shape, dtype=bool))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_model(rng):
    """Factory of non-Cartesian models with random maps."""

    def _build(shape=(16, 16), n_coils=2, n_samples=50):
        return ForwardModel(random_trajectory(rng, n_samples), random_maps(rng, shape, n_coils))

    return _build


@pytest.fixture
def cartesian_model(rng):
    """Factory of full Cartesian models; well conditioned random maps by default."""

    def _build(shape=(8, 8), n_coils=2, maps=None):
        if maps is None:
            smaps = well_conditioned_maps(rng, shape, n_coils)
        else:
            smaps = SensitivityMaps(maps, np.ones(shape, dtype=bool))
        return ForwardModel(make_cartesian(shape), smaps)

    return _build


def dense_operator(model):
    """The ``(L M, H W)`` matrix of ``A``, built column by column."""
    height, width = model.shape
    columns = []
    for index in range(height * width):
        basis = np.zeros(height * width, dtype=np.complex128)
        basis[index] = 1.0
        columns.append(model.op(basis.reshape(height, width)).ravel())
    return np.stack(columns, axis=1)
