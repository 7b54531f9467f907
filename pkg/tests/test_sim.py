import numpy as np
import pytest
from pydantic import ValidationError

from pnpmri.bench.metrics import psnr_array
from pnpmri.core.types import ComplexImage, MulticoilKSpace, SensitivityMaps, Trajectory
from pnpmri.exceptions import DimensionError, EstimationError, InvalidArgumentError
from pnpmri.operators import ForwardModel, forward
from pnpmri.sim import (
    AcquisitionConfig,
    acquire,
    coil_images,
    complex_noise,
    estimate_smaps,
    make_cartesian,
    make_coil_maps,
    make_phantom,
    make_spiral,
    read_case,
    root_sum_of_squares,
    simulate_case,
    virtual_coil_combine,
    write_case,
)
from pnpmri.sim.coils import hamming_taper
from pnpmri.sim.phantom import unit_grid
from pnpmri.solve import conjugate_gradient

from conftest import random_image


def test_phantom_bounds_and_support():
    phantom, mask = make_phantom((64, 64), 0)
    magnitude = phantom.magnitude()
    assert phantom.shape == (64, 64)
    assert np.all(magnitude <= 1.0 + 1e-12)
    np.testing.assert_array_equal(mask, magnitude > 0)
    assert 0 < mask.sum() < mask.size


def test_phantom_is_seeded():
    a, _ = make_phantom((32, 32), 5)
    b, _ = make_phantom((32, 32), 5)
    c, _ = make_phantom((32, 32), 6)
    np.testing.assert_array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)
    np.testing.assert_allclose(a.magnitude(), c.magnitude(), atol=1e-15)


def test_phantom_minimum_size():
    with pytest.raises(InvalidArgumentError):
        make_phantom((8, 64), 0)


def test_coil_maps_normalization_and_support():
    _, mask = make_phantom((64, 64), 0)
    smaps = make_coil_maps((64, 64), 4, 0, mask)
    assert np.max(smaps.sum_of_squares()) == pytest.approx(1.0, abs=1e-12)
    assert np.all(smaps.maps[:, ~mask] == 0)
    with pytest.raises(InvalidArgumentError):
        make_coil_maps((64, 64), 0, 0)


def test_coil_maps_are_smooth(rng):
    smaps = make_coil_maps((64, 64), 1, 0)
    profile = smaps.maps[0]
    noise = random_image(rng, (64, 64))
    noise *= np.linalg.norm(profile) / np.linalg.norm(noise)

    def total_variation(img):
        return np.sum(np.abs(np.diff(img, axis=0))) + np.sum(np.abs(np.diff(img, axis=1)))

    assert total_variation(profile) < 0.2 * total_variation(noise)


def test_spiral_stays_inside_the_band():
    traj = make_spiral((64, 64), 16, 64)
    assert len(traj) == 1024
    assert np.all(np.abs(traj.points) < 0.5)
    assert traj.density_weights.mean() == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        make_spiral((64, 64), 0, 64)


def test_spiral_is_invariant_to_the_interleave_rotation():
    shots = 8
    traj = make_spiral((32, 32), shots, 32)
    angle = 2 * np.pi / shots
    rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    rotated = traj.points @ rotation.T
    distances = np.linalg.norm(rotated[:, None, :] - traj.points[None, :, :], axis=2)
    assert np.max(np.min(distances, axis=1)) <= 1e-9


def test_acceleration_factor_sets_the_sample_count():
    cfg = AcquisitionConfig(shape=(64, 64), af=4.0, shots=16)
    assert cfg.n_samples == 1024 and cfg.shot_length == 64
    assert len(cfg.trajectory()) == 1024
    assert AcquisitionConfig(shape=(64, 64), af=16.0, shots=16).n_samples == 256


@pytest.mark.parametrize("af, shots", [(3.0, 16), (4.0, 15), (5.0, 7)])
def test_sample_count_need_not_split_evenly_into_shots(af, shots):
    cfg = AcquisitionConfig(shape=(64, 64), af=af, shots=shots)
    traj = cfg.trajectory()
    assert len(traj) == cfg.n_samples == round(4096 / af)
    assert cfg.shot_length == -(-cfg.n_samples // shots)
    assert traj.density_weights.mean() == pytest.approx(1.0)
    full = AcquisitionConfig(shape=(64, 64), af=af, shots=shots, noise_scale=0.0)
    assert len(simulate_case(full).kspace.coils[0]) == cfg.n_samples


def test_acquisition_config_validation():
    with pytest.raises(ValidationError):
        AcquisitionConfig(af=0.5)
    with pytest.raises(ValidationError):
        AcquisitionConfig(shape=(64, 64), af=4.0, shots=16, samples_per_shot=10)
    with pytest.raises(ValidationError):
        AcquisitionConfig(shape=(64, 64), af=4.0, shots=16, samples_per_shot=65)
    with pytest.raises(ValidationError):
        AcquisitionConfig(coils=2, unknown=1)


def test_noiseless_acquisition_is_the_forward_model():
    cfg = AcquisitionConfig(shape=(32, 32), coils=2, af=4.0, shots=8, noise_scale=0.0)
    phantom, mask = make_phantom(cfg.shape, 0)
    smaps = make_coil_maps(cfg.shape, 2, 0, mask)
    y = acquire(cfg, phantom, smaps)
    assert y.noise_variance == 0.0
    expected = forward(ForwardModel(cfg.trajectory(), smaps), phantom)
    np.testing.assert_allclose(y.coils, expected.coils, atol=1e-13)


def test_acquisition_is_deterministic():
    cfg = AcquisitionConfig(shape=(32, 32), coils=2, af=4.0, shots=8, seed=3)
    a, b = simulate_case(cfg), simulate_case(cfg)
    np.testing.assert_array_equal(a.kspace.coils, b.kspace.coils)
    np.testing.assert_array_equal(a.smaps.maps, b.smaps.maps)


def test_noise_statistics():
    cfg = AcquisitionConfig(shape=(64, 64), coils=4, af=1.0, shots=16, noise_scale=1e-2)
    phantom, mask = make_phantom(cfg.shape, 0)
    smaps = make_coil_maps(cfg.shape, 4, 0, mask)
    y = acquire(cfg, phantom, smaps)
    noise = y.coils - forward(ForwardModel(cfg.trajectory(), smaps), phantom).coils
    assert noise.size >= 10_000
    nu = y.noise_variance
    assert nu == pytest.approx(
        1e-2 * np.max(np.sum(np.abs(smaps.maps * phantom.data) ** 2, axis=0)), rel=1e-12
    )
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(nu, rel=0.05)
    assert np.mean(noise.real**2) == pytest.approx(nu / 2, rel=0.05)
    assert np.mean(noise.imag**2) == pytest.approx(nu / 2, rel=0.05)


def test_noise_stream_does_not_depend_on_length():
    np.testing.assert_array_equal(complex_noise(7, 1, 100)[:10], complex_noise(7, 1, 10))
    assert not np.array_equal(complex_noise(7, 1, 10), complex_noise(7, 2, 10))


def test_acquire_checks_shapes():
    cfg = AcquisitionConfig(shape=(32, 32), coils=1, af=4.0, shots=8)
    smaps = make_coil_maps((32, 32), 1, 0)
    with pytest.raises(DimensionError):
        acquire(cfg, ComplexImage.zeros((16, 16)), smaps)


def test_estimated_maps_recover_the_true_profiles():
    shape = (64, 64)
    x, y = unit_grid(shape)
    support = np.hypot(x, y) <= 0.9
    inner = np.hypot(x, y) <= 0.6
    smaps = make_coil_maps(shape, 4, 0)
    traj = make_cartesian(shape)
    model = ForwardModel(traj, smaps)
    kspace = forward(model, ComplexImage(support.astype(np.complex128)))
    estimated = estimate_smaps(kspace, traj, shape, mask=support)
    assert np.max(np.abs(estimated.sum_of_squares()[support] - 1.0)) <= 1e-6
    truth = smaps.maps / np.sqrt(smaps.sum_of_squares())
    error = np.linalg.norm((estimated.maps - truth)[:, inner])
    assert error <= 0.1 * np.linalg.norm(truth[:, inner])


def test_hamming_taper_profile():
    radius = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 2.0])
    taper = hamming_taper(radius, 1.0)
    expected = 0.54 + 0.46 * np.cos(np.pi * np.minimum(radius, 1.0))
    np.testing.assert_allclose(taper, expected, atol=1e-5)
    assert taper[0] == pytest.approx(1.0) and taper[-1] == pytest.approx(0.08)


def _least_squares_with_estimated_maps(phantom, mask, smaps):
    traj = make_cartesian(phantom.shape)
    kspace = forward(ForwardModel(traj, smaps), phantom)
    estimated = estimate_smaps(kspace, traj, phantom.shape, mask=mask)
    model = ForwardModel(traj, estimated)
    result = conjugate_gradient(model.normal, model.adjoint(kspace.coils), tol=1e-10, max_iter=200)
    assert result.converged
    return result.solution


def test_estimated_maps_round_trip_on_full_cartesian_data():
    # RSS-normalized maps only recover x * sqrt(sum_l |S_l|^2)
    phantom, mask = make_phantom((64, 64), 0)
    smaps = make_coil_maps((64, 64), 4, 0, mask)
    recon = _least_squares_with_estimated_maps(phantom, mask, smaps)
    weighted = phantom.data * np.sqrt(smaps.sum_of_squares())
    assert psnr_array(recon, weighted, mask) >= 40.0

    # with maps of unit root sum of squares the coil-weighted truth is x itself
    rss = np.sqrt(smaps.sum_of_squares())
    unit = SensitivityMaps(np.where(mask, smaps.maps / np.where(mask, rss, 1.0), 0), mask)
    recon = _least_squares_with_estimated_maps(phantom, mask, unit)
    assert psnr_array(recon, phantom.data, mask) >= 40.0


def test_smap_window_boundary():
    shape = (320, 320)
    data = MulticoilKSpace(np.ones((1, 1)))
    inside = Trajectory(np.array([[0.031, 0.0]]), np.ones(1))
    outside = Trajectory(np.array([[0.0315, 0.0]]), np.ones(1))
    assert estimate_smaps(data, inside, shape, window=20).shape == shape
    with pytest.raises(EstimationError):
        estimate_smaps(data, outside, shape, window=20)


def test_single_coil_combination_removes_the_phase():
    x, y = unit_grid((32, 32))
    magnitude = 1.0 + 0.5 * np.cos(np.pi * x) * np.cos(np.pi * y)
    coil = ComplexImage(magnitude * np.exp(1.3j))
    np.testing.assert_allclose(virtual_coil_combine([coil]).data, magnitude, atol=1e-12)


def test_identical_coils_combine_to_sqrt_two():
    x, y = unit_grid((32, 32))
    data = (1.0 + 0.3 * x) * np.exp(1j * (0.5 + x * y + 0.4 * y))
    combined = virtual_coil_combine([ComplexImage(data), ComplexImage(data)])
    np.testing.assert_allclose(np.abs(combined.data), np.sqrt(2) * np.abs(data), rtol=1e-12)


def test_combination_matches_root_sum_of_squares():
    cfg = AcquisitionConfig(shape=(64, 64), coils=4, af=1.0, shots=16)
    phantom, mask = make_phantom(cfg.shape, 0)
    smaps = make_coil_maps(cfg.shape, 4, 0, mask)
    images = [ComplexImage(smaps.maps[c] * phantom.data) for c in range(4)]
    combined = np.abs(virtual_coil_combine(images).data)
    rss = root_sum_of_squares(images)
    relative = np.abs(combined[mask] - rss[mask]) / rss[mask]
    assert np.all(combined <= rss * (1 + 1e-12) + 1e-15)
    assert np.median(relative) <= 0.02


def test_combination_argument_checks():
    with pytest.raises(InvalidArgumentError):
        virtual_coil_combine([])
    with pytest.raises(DimensionError):
        virtual_coil_combine([ComplexImage.zeros((4, 4)), ComplexImage.zeros((4, 5))])


def test_coil_images_on_full_cartesian_data(rng):
    shape = (16, 16)
    traj = make_cartesian(shape)
    smaps = SensitivityMaps(random_image(rng, (2,) + shape), np.ones(shape, dtype=bool))
    x = random_image(rng, shape)
    kspace = forward(ForwardModel(traj, smaps), ComplexImage(x))
    images = coil_images(kspace, traj, shape)
    for coil, img in enumerate(images):
        np.testing.assert_allclose(img.data, smaps.maps[coil] * x, atol=1e-12)


def test_case_round_trip(tmp_path):
    cfg = AcquisitionConfig(shape=(32, 32), coils=2, af=4.0, shots=8, seed=1)
    case = simulate_case(cfg)
    write_case(tmp_path / "case", case, {"seed": 1})
    loaded = read_case(tmp_path / "case")
    np.testing.assert_array_equal(loaded.phantom.data, case.phantom.data)
    np.testing.assert_array_equal(loaded.mask, case.mask)
    np.testing.assert_array_equal(loaded.smaps.maps, case.smaps.maps)
    np.testing.assert_array_equal(loaded.trajectory.points, case.trajectory.points)
    np.testing.assert_array_equal(loaded.kspace.coils, case.kspace.coils)
    assert loaded.kspace.noise_variance == case.kspace.noise_variance
