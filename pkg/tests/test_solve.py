import numpy as np
import pytest
from pydantic import ValidationError

from pnpmri.core.types import ComplexImage, MulticoilKSpace
from pnpmri.exceptions import DivergenceError, InvalidArgumentError, SolverError
from pnpmri.kinds import Algorithm, DenoiserKind, PreconditionerKind, ProxMetric
from pnpmri.priors import DenoiserSpec
from pnpmri.solve import (
    AnnealingSchedule,
    Preconditioner,
    SolverConfig,
    apply_preconditioner,
    conjugate_gradient,
    fista_wavelet,
    pnp_hqs,
    pnp_pgd,
    prox_f_metric,
    reconstruct,
    run_verification_suite,
    spectral_radius_scan,
    toy_problem,
    verify_proposition1,
)

from conftest import dense_operator, random_image

IDENTITY = DenoiserSpec(kind=DenoiserKind.IDENTITY)
L1 = DenoiserSpec(kind=DenoiserKind.SOFT_THRESHOLD, tau_gain=1.0)
ALL_KINDS = list(PreconditionerKind)


def _data(rng, model):
    return MulticoilKSpace(random_image(rng, (model.n_coils, model.n_samples)))


def _least_squares(model, y):
    dense = dense_operator(model)
    solution, *_ = np.linalg.lstsq(dense, y.coils.ravel(), rcond=None)
    return solution.reshape(model.shape)


def test_preconditioner_validation():
    with pytest.raises(InvalidArgumentError):
        Preconditioner(PreconditionerKind.F1, alpha=0.0)
    with pytest.raises(InvalidArgumentError):
        Preconditioner(PreconditionerKind.F1, lam_max=-1.0)
    assert Preconditioner("chebyshev").kind is PreconditionerKind.CHEBYSHEV


def test_preconditioner_polynomials():
    lam = np.array([0.0, 0.5, 1.0])
    np.testing.assert_allclose(Preconditioner(PreconditionerKind.IDENTITY).polynomial(lam), 1.0)
    np.testing.assert_allclose(Preconditioner(PreconditionerKind.F1).polynomial(lam), [2, 1.5, 1])
    np.testing.assert_allclose(
        Preconditioner(PreconditionerKind.CHEBYSHEV).polynomial(lam), [4, 4 - 5 / 3, 2 / 3]
    )


def test_f1_on_a_unitary_model_is_the_identity(cartesian_model, rng):
    model = cartesian_model((8, 8), maps=np.ones((1, 8, 8)))
    precond = Preconditioner.for_model(PreconditionerKind.F1, model)
    assert precond.lam_max == pytest.approx(1.0, rel=1e-12)
    v = ComplexImage(random_image(rng, (8, 8)))
    np.testing.assert_allclose(apply_preconditioner(precond, model, v).data, v.data, atol=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_preconditioners_are_hermitian(random_model, rng, kind):
    model = random_model((8, 8), 2, 40)
    op = Preconditioner.for_model(kind, model).bind(model)
    a, b = random_image(rng, (8, 8)), random_image(rng, (8, 8))
    ab, ba = np.vdot(a, op(b)), np.vdot(b, op(a))
    assert abs(ab - np.conj(ba)) <= 1e-10 * abs(ab)


def test_spectral_radius_examples():
    assert spectral_radius_scan(PreconditionerKind.IDENTITY, 1.0, [1.0]) == 0.0
    assert spectral_radius_scan(PreconditionerKind.F1, 1.0, [0.25, 0.5, 0.75, 1.0]) == pytest.approx(
        0.5625
    )
    with pytest.raises(InvalidArgumentError):
        spectral_radius_scan(PreconditionerKind.F1, 1.0, [])


def test_spectral_radius_ordering():
    grid = np.arange(30, 101) / 100.0
    identity = spectral_radius_scan(PreconditionerKind.IDENTITY, 1.0, grid)
    f1 = spectral_radius_scan(PreconditionerKind.F1, 1.0, grid)
    chebyshev = spectral_radius_scan(PreconditionerKind.CHEBYSHEV, 1.0, grid)
    assert identity == pytest.approx(0.7)
    assert f1 == pytest.approx(0.49)
    assert chebyshev == pytest.approx(1.0 / 3.0)
    assert chebyshev < f1 < identity
    wide = np.linspace(0.1, 1.0, 91)
    assert spectral_radius_scan(PreconditionerKind.CHEBYSHEV, 1.0, wide) < spectral_radius_scan(
        PreconditionerKind.IDENTITY, 1.0, wide
    )


def test_conjugate_gradient_matches_dense_solve(rng):
    b = random_image(rng, (20, 20))
    matrix = b.conj().T @ b + 20 * np.eye(20)
    rhs = random_image(rng, (20,))
    result = conjugate_gradient(lambda v: matrix @ v, rhs, tol=1e-13, max_iter=200)
    assert result.converged and result.iterations <= 200
    np.testing.assert_allclose(result.solution, np.linalg.solve(matrix, rhs), atol=1e-10)


def test_conjugate_gradient_edge_cases(rng):
    result = conjugate_gradient(lambda v: 3 * v, np.zeros(4, dtype=np.complex128))
    assert result.converged and result.iterations == 0 and np.all(result.solution == 0)
    with pytest.raises(SolverError):
        conjugate_gradient(lambda v: -v, random_image(rng, (5,)))
    capped = conjugate_gradient(
        lambda v: np.arange(1, 11) * v, random_image(rng, (10,)), tol=1e-14, max_iter=2
    )
    assert not capped.converged and capped.iterations == 2


def test_prox_of_the_scalar_problem():
    model, y = toy_problem(1.0)
    out = prox_f_metric(model, y, ComplexImage.zeros((1, 1)), 1.0, Preconditioner())
    assert out.data[0, 0] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_prox_matches_dense_solve(random_model, rng, kind):
    model = random_model((8, 8), 2, 40)
    y = _data(rng, model)
    x = random_image(rng, (8, 8))
    gamma = 0.7 / model.lipschitz()
    precond = Preconditioner.for_model(kind, model)
    got = prox_f_metric(model, y, ComplexImage(x), gamma, precond, tol=1e-12, max_iter=500)

    dense = dense_operator(model)
    normal = dense.conj().T @ dense
    c0 = float(precond.polynomial(0.0))
    c1 = c0 - float(precond.polynomial(1.0))
    metric = c0 * np.eye(64) - (c1 / precond.lam_max) * normal
    rhs = gamma * dense.conj().T @ y.coils.ravel() + metric @ x.ravel()
    expected = np.linalg.solve(gamma * normal + metric, rhs).reshape(8, 8)
    assert np.linalg.norm(got.data - expected) <= 1e-8 * np.linalg.norm(expected)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_inverse_metric_prox_matches_dense_solve(random_model, rng, kind):
    model = random_model((8, 8), 2, 40)
    y = _data(rng, model)
    x = random_image(rng, (8, 8))
    gamma = 0.7 / model.lipschitz()
    precond = Preconditioner.for_model(kind, model)
    got = prox_f_metric(
        model, y, ComplexImage(x), gamma, precond, tol=1e-12, max_iter=500,
        metric=ProxMetric.INVERSE,
    )

    dense = dense_operator(model)
    normal = dense.conj().T @ dense
    c0 = float(precond.polynomial(0.0))
    c1 = c0 - float(precond.polynomial(1.0))
    metric = c0 * np.eye(64) - (c1 / precond.lam_max) * normal
    rhs = x.ravel() + gamma * metric @ (dense.conj().T @ y.coils.ravel())
    expected = np.linalg.solve(np.eye(64) + gamma * metric @ normal, rhs).reshape(8, 8)
    assert np.linalg.norm(got.data - expected) <= 1e-8 * np.linalg.norm(expected)


def test_both_metrics_agree_without_preconditioning(random_model, rng):
    model = random_model((8, 8), 2, 40)
    y = _data(rng, model)
    x = ComplexImage(random_image(rng, (8, 8)))
    gamma = 0.5 / model.lipschitz()
    direct = prox_f_metric(model, y, x, gamma, Preconditioner(), tol=1e-12)
    inverse = prox_f_metric(
        model, y, x, gamma, Preconditioner(), tol=1e-12, metric=ProxMetric.INVERSE
    )
    np.testing.assert_allclose(inverse.data, direct.data, atol=1e-9)


def test_f1_metrics_move_the_data_step_in_opposite_directions():
    # scalar problem at the bottom of the spectrum: p(l) = 2 there
    model, y = toy_problem(1.0)
    x = ComplexImage.zeros((1, 1))
    precond = Preconditioner(PreconditionerKind.F1, 1e-9, 1.0)
    plain = prox_f_metric(model, y, x, 1.0, Preconditioner()).data[0, 0]
    direct = prox_f_metric(model, y, x, 1.0, precond).data[0, 0]
    inverse = prox_f_metric(model, y, x, 1.0, precond, metric=ProxMetric.INVERSE).data[0, 0]
    assert plain == pytest.approx(1.0 / 2.0, abs=1e-9)
    assert direct == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert inverse == pytest.approx(2.0 / 3.0, abs=1e-6)


def test_hqs_with_the_inverse_metric_reaches_the_same_fixed_point(cartesian_model, rng):
    model = cartesian_model((8, 8))
    y = _data(rng, model)
    results = {}
    for metric in ProxMetric:
        cfg = SolverConfig(
            algorithm=Algorithm.PNP_HQS,
            preconditioner=PreconditionerKind.F1,
            prox_metric=metric,
            denoiser=IDENTITY,
            sigma=0.0,
            gamma_scale=1.0,
            n_iter=600,
            cg_tol=1e-12,
            cg_max_iter=200,
        )
        results[metric], _, _ = pnp_hqs(model, y, cfg)
    expected = _least_squares(model, y)
    for x in results.values():
        assert np.linalg.norm(x.data - expected) <= 1e-6 * np.linalg.norm(expected)


def test_prox_with_vanishing_step_returns_the_input(random_model, rng):
    model = random_model((8, 8), 2, 40)
    x = random_image(rng, (8, 8))
    out = prox_f_metric(model, _data(rng, model), ComplexImage(x), 1e-10, Preconditioner())
    assert np.linalg.norm(out.data - x) <= 1e-6


def test_prox_closed_form_on_normalized_cartesian_maps(cartesian_model, rng):
    angle = rng.uniform(0, np.pi / 2, size=(8, 8))
    maps = np.stack([np.cos(angle) * np.exp(1j * angle), np.sin(angle)])
    model = cartesian_model((8, 8), maps=maps)
    y = _data(rng, model)
    x = random_image(rng, (8, 8))
    gamma = 0.8
    out = prox_f_metric(model, y, ComplexImage(x), gamma, Preconditioner(), tol=1e-12)
    expected = (x + gamma * model.adjoint(y.coils)) / (1 + gamma)
    np.testing.assert_allclose(out.data, expected, atol=1e-9)


def test_schedule_endpoints_and_steps():
    schedule = AnnealingSchedule(sigma0=0.1, sigma_min=1e-5, iterations=100, lambda_reg=100)
    sigmas = schedule.sigmas()
    assert sigmas[0] == 0.1 and sigmas[-1] == 1e-5
    assert np.all(np.diff(sigmas) < 0)
    np.testing.assert_allclose(schedule.gammas(4.0), 100 * sigmas / 4.0)
    assert schedule.xi == pytest.approx((1e-4) ** (1 / 99))


def test_schedule_validation():
    with pytest.raises(ValidationError):
        AnnealingSchedule(sigma0=0.1, sigma_min=0.1, lambda_reg=1.0)
    with pytest.raises(ValidationError):
        AnnealingSchedule(sigma0=0.1, sigma_min=0.01, iterations=1, lambda_reg=1.0)
    with pytest.raises(ValidationError):
        AnnealingSchedule(sigma0=0.1, sigma_min=0.01, lambda_reg=0.0)


def test_solver_config_validation():
    with pytest.raises(ValidationError):
        SolverConfig(algorithm=Algorithm.PNP_PGD)
    with pytest.raises(ValidationError):
        SolverConfig(algorithm=Algorithm.PNP_PGD, sigma=0.1, gamma=1.0, gamma_scale=1.0)
    cfg = SolverConfig(algorithm="pnp_hqs", preconditioner="f1", sigma=0.1, gamma_scale=2.0, n_iter=7)
    assert cfg.label == "pnp_hqs-f1"
    gammas, sigmas = cfg.parameters(4.0)
    np.testing.assert_array_equal(gammas, np.full(7, 0.5))
    np.testing.assert_array_equal(sigmas, np.full(7, 0.1))
    assert SolverConfig(algorithm="fista_wavelet", name="base").label == "base"


def test_pgd_on_the_scalar_problem():
    model, y = toy_problem(2.0)
    cfg = SolverConfig(algorithm="pnp_pgd", denoiser=L1, sigma=1.0, gamma=1.0, init="zeros")
    x, trace = pnp_pgd(model, y, cfg)
    assert x.data[0, 0] == pytest.approx(1.0, abs=1e-15)
    assert len(trace) == 2
    assert [entry.k for entry in trace] == [0, 1]
    assert trace[0].dx == pytest.approx(1.0)
    assert trace[-1].objective == pytest.approx(1.5)


def test_hqs_on_the_scalar_problem():
    model, y = toy_problem(2.0)
    cfg = SolverConfig(
        algorithm="pnp_hqs", denoiser=L1, sigma=1.0, gamma=1.0, init="zeros", n_iter=5
    )
    x, u, trace = pnp_hqs(model, y, cfg)
    assert x.data[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert u.data[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert len(trace) == 5
    assert all(entry.cg_converged for entry in trace)


def test_pgd_with_identity_denoiser_solves_least_squares(cartesian_model, rng):
    model = cartesian_model((8, 8), 2)
    y = _data(rng, model)
    cfg = SolverConfig(
        algorithm="pnp_pgd", denoiser=IDENTITY, sigma=0.0, gamma_scale=1.0, n_iter=400,
        early_stop=False,
    )
    x, trace = pnp_pgd(model, y, cfg)
    expected = _least_squares(model, y)
    assert np.linalg.norm(x.data - expected) <= 1e-6 * np.linalg.norm(expected)
    fidelity = trace.column("fidelity")
    assert np.all(np.diff(fidelity) <= 1e-12 * fidelity[0])


def test_pgd_composite_objective_decreases(random_model, rng):
    model = random_model((16, 16), 2, 100)
    y = _data(rng, model)
    denoiser = DenoiserSpec(levels=2, tau_gain=1.0)
    cfg = SolverConfig(
        algorithm="pnp_pgd", denoiser=denoiser, sigma=0.05, gamma_scale=1.0, n_iter=30,
        early_stop=False,
    )
    _, trace = pnp_pgd(model, y, cfg)
    objective = trace.column("objective")
    assert not np.any(np.isnan(objective))
    assert np.all(np.diff(objective) <= 1e-10 * objective[0])


def test_hqs_follows_the_schedule(random_model, rng):
    model = random_model((16, 16), 2, 100)
    schedule = AnnealingSchedule(sigma0=0.1, sigma_min=1e-3, iterations=10, lambda_reg=5.0)
    cfg = SolverConfig(
        algorithm="pnp_hqs", preconditioner="f1", denoiser=DenoiserSpec(levels=2),
        schedule=schedule, early_stop=False,
    )
    _, _, trace = pnp_hqs(model, _data(rng, model), cfg)
    sigmas = trace.column("sigma")
    assert len(trace) == 10
    assert sigmas[0] == 0.1 and sigmas[-1] == 1e-3
    assert np.all(np.diff(sigmas) < 0)
    np.testing.assert_allclose(trace.column("gamma"), 5.0 * sigmas / model.lipschitz(), rtol=1e-12)


def test_hqs_reports_inner_failures(cartesian_model, rng):
    model = cartesian_model((8, 8), maps=np.ones((1, 8, 8)))
    cfg = SolverConfig(
        algorithm="pnp_hqs", preconditioner="f1", alpha=1000.0, denoiser=IDENTITY,
        sigma=0.0, gamma=1e-6, init="zeros", n_iter=3,
    )
    with pytest.raises(SolverError, match="iteration 0") as info:
        pnp_hqs(model, _data(rng, model), cfg)
    assert info.value.trace is not None and len(info.value.trace) == 0


def test_pgd_divergence(cartesian_model, rng):
    model = cartesian_model((8, 8), maps=np.ones((1, 8, 8)))
    cfg = SolverConfig(
        algorithm="pnp_pgd", denoiser=IDENTITY, sigma=0.0, gamma=1e3, n_iter=300,
        early_stop=False, init="zeros",
    )
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError) as info:
            pnp_pgd(model, _data(rng, model), cfg)
    assert len(info.value.trace) > 0


def test_algorithm_mismatch(cartesian_model, rng):
    model = cartesian_model((8, 8))
    cfg = SolverConfig(algorithm="pnp_hqs", denoiser=IDENTITY, sigma=0.0, gamma=1.0)
    with pytest.raises(InvalidArgumentError):
        pnp_pgd(model, _data(rng, model), cfg)


def test_reconstruct_dispatch(cartesian_model, rng):
    model = cartesian_model((8, 8))
    y = _data(rng, model)
    hqs = SolverConfig(algorithm="pnp_hqs", denoiser=IDENTITY, sigma=0.0, gamma=1.0, n_iter=2)
    assert reconstruct(model, y, hqs).u is not None
    fista = SolverConfig(algorithm="fista_wavelet", denoiser=DenoiserSpec(levels=1), n_iter=2)
    result = reconstruct(model, y, fista)
    assert result.u is None and len(result.trace) == 2


def test_monitor_feeds_the_trace(cartesian_model, rng):
    model = cartesian_model((8, 8))
    cfg = SolverConfig(algorithm="pnp_pgd", denoiser=IDENTITY, sigma=0.0, gamma_scale=1.0, n_iter=3)
    _, trace = pnp_pgd(model, _data(rng, model), cfg, monitor=lambda x: (30.0, 0.9))
    np.testing.assert_array_equal(trace.column("psnr"), [30.0] * len(trace))


def test_fista_without_regularization_solves_least_squares(cartesian_model, rng):
    model = cartesian_model((8, 8), 2)
    y = _data(rng, model)
    cfg = SolverConfig(
        algorithm="fista_wavelet", denoiser=DenoiserSpec(levels=1), lambda_reg=0.0, n_iter=300
    )
    x, trace = fista_wavelet(model, y, cfg)
    expected = _least_squares(model, y)
    assert np.linalg.norm(x.data - expected) <= 1e-5 * np.linalg.norm(expected)
    assert np.all(trace.column("sigma") == 0)


def test_fista_is_monotone_and_beats_ista(random_model, rng):
    model = random_model((16, 16), 2, 100)
    y = _data(rng, model)
    common = dict(algorithm="fista_wavelet", denoiser=DenoiserSpec(levels=2), lambda_reg=0.01, n_iter=30)
    _, fast = fista_wavelet(model, y, SolverConfig(**common))
    _, slow = fista_wavelet(model, y, SolverConfig(accelerate=False, **common))
    for trace in (fast, slow):
        objective = trace.column("objective")
        assert np.all(np.diff(objective) <= 1e-10 * objective[0])
    assert fast[29].objective <= slow[29].objective


def test_fista_needs_a_fitting_shape(random_model, rng):
    model = random_model((12, 12), 1, 30)
    cfg = SolverConfig(algorithm="fista_wavelet", denoiser=DenoiserSpec(levels=3), n_iter=2)
    with pytest.raises(InvalidArgumentError):
        fista_wavelet(model, _data(rng, model), cfg)


@pytest.mark.parametrize(
    "spec, gamma, expected",
    [
        (L1, 1.0, (1.0, 1.0, 0.0)),
        (L1, 1.5, (4 / 3, 4 / 3, 1 / 3)),
        (IDENTITY, 1.0, (2.0, 2.0, 2.0)),
    ],
)
def test_fixed_point_optimality_on_the_scalar_problem(spec, gamma, expected):
    model, y = toy_problem(2.0)
    report = verify_proposition1(model, y, spec, 1.0, gamma)
    assert report.passed
    got = (report.pgd_x[0, 0], report.hqs_u[0, 0], report.hqs_x[0, 0])
    np.testing.assert_allclose(np.array(got), np.array(expected), atol=1e-8)
    assert report.pgd_grid_error <= 1e-4 and report.hqs_u_grid_error <= 1e-4


def test_fixed_point_optimality_with_wavelets(cartesian_model, rng):
    model = cartesian_model((8, 8), 2)
    y = _data(rng, model)
    spec = DenoiserSpec(levels=1, tau_gain=1.0)
    report = verify_proposition1(model, y, spec, 0.05, 1.0 / model.lipschitz())
    assert not report.inconclusive
    assert report.passed, report.summary()
    assert report.pgd_grid_error is None


def test_unfinished_runs_are_inconclusive():
    model, y = toy_problem(2.0)
    report = verify_proposition1(model, y, L1, 1.0, 1.0, max_iter=1)
    assert report.inconclusive and not report.passed
    assert "inconclusive" in report.summary()


def test_optimality_checks_reject_bad_arguments():
    model, y = toy_problem(2.0)
    with pytest.raises(InvalidArgumentError):
        verify_proposition1(model, y, L1, 1.0, 0.0)


def test_verification_suite_passes():
    results = run_verification_suite()
    assert len(results) == 4
    for _, success, msg in results:
        assert success, msg
