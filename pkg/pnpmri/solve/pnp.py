"""
Plug-and-Play solvers.

PnP-PGD:  u_k = x_k - gamma_k P grad f(x_k);   x_{k+1} = D_{sigma_k}(u_k)
PnP-HQS:  u_k = prox^P_{gamma_k f}(x_k);       x_{k+1} = D_{sigma_k}(u_k)

HQS measures the prox distance in P, or in P^{-1} with ``prox_metric =
"inverse"``; the latter is the metric of the preconditioned PGD step.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Tuple, Union

import numpy as np

from pnpmri import config
from pnpmri.core.types import ComplexImage, MulticoilKSpace, SolverTrace, TraceEntry
from pnpmri.exceptions import DivergenceError, InvalidArgumentError, SolverError
from pnpmri.kinds import Algorithm, DenoiserKind, ProxMetric
from pnpmri.logger import logger
from pnpmri.operators.forward_model import ForwardModel, zero_filled
from pnpmri.priors.denoisers import open_denoiser
from pnpmri.priors.functionals import regularizer_value
from pnpmri.solve.cg import solve_prox, solve_prox_inverse
from pnpmri.solve.preconditioners import Preconditioner
from pnpmri.solve.settings import SolverConfig

Monitor = Callable[[np.ndarray], Tuple[Union[float, None], Union[float, None]]]


class SolverResult(NamedTuple):
    x: ComplexImage
    u: Union[ComplexImage, None]
    trace: SolverTrace


def initial_point(model: ForwardModel, y: MulticoilKSpace, cfg: SolverConfig) -> np.ndarray:
    """``x_0``: the zero-filled adjoint or zeros."""
    if cfg.init == "zeros":
        return np.zeros(model.shape, dtype=np.complex128)
    return np.array(zero_filled(model, y).data)


def _check_finite(x: np.ndarray, k: int, trace: SolverTrace, label: str):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"{label} iterate {k} is not finite", trace)


def _fidelity(model: ForwardModel, x: np.ndarray, y: np.ndarray) -> float:
    residual = model.op(x) - y
    return 0.5 * float(np.vdot(residual, residual).real)


class _Recorder:
    """Builds trace entries and decides early stopping."""

    def __init__(self, model, y, cfg: SolverConfig, monitor: Union[Monitor, None]):
        self.model = model
        self.y = y
        self.cfg = cfg
        self.monitor = monitor
        self.trace = SolverTrace()
        self.known_g = cfg.denoiser.kind is not DenoiserKind.EXTERNAL

    def record(self, k, gamma, sigma, x_new, x_old, cg=None, objective_weight=None) -> bool:
        """Appends an entry; returns True when the run should stop early."""
        _check_finite(x_new, k, self.trace, self.cfg.label)
        dx = float(np.linalg.norm(x_new - x_old))
        fid = _fidelity(self.model, x_new, self.y)
        psnr = ssim = None
        if self.monitor is not None:
            psnr, ssim = self.monitor(x_new)
        objective = None
        if self.known_g and objective_weight is not None:
            objective = objective_weight * fid + regularizer_value(self.cfg.denoiser, x_new, sigma)
        self.trace.append(
            TraceEntry(
                k=k,
                gamma=float(gamma),
                sigma=float(sigma),
                fidelity=fid,
                dx=dx,
                psnr=psnr,
                ssim=ssim,
                objective=objective,
                cg_iterations=None if cg is None else cg.iterations,
                cg_converged=True if cg is None else cg.converged,
            )
        )
        logger.debug(
            "%s k=%d gamma=%.3e sigma=%.3e f=%.6e dx=%.3e psnr=%s",
            self.cfg.label, k, gamma, sigma, fid, dx, psnr,
        )
        scale = float(np.linalg.norm(x_old))
        return self.cfg.early_stop and dx < config.EARLY_STOP_RTOL * scale


def _setup(model: ForwardModel, cfg: SolverConfig, expected: Algorithm):
    if cfg.algorithm is not expected:
        raise InvalidArgumentError(f"config is for {cfg.algorithm.value}, not {expected.value}")
    lam_max = model.lipschitz()
    gammas, sigmas = cfg.parameters(lam_max)
    precond = Preconditioner(cfg.preconditioner, cfg.alpha, lam_max)
    return gammas, sigmas, precond.bind(model)


def _finish(cfg: SolverConfig, trace: SolverTrace):
    last = trace[-1]
    logger.info(
        "%s finished after %d iterations: f=%.6e dx=%.3e%s",
        cfg.label, len(trace), last.fidelity, last.dx,
        "" if last.psnr is None else f" psnr={last.psnr:.3f} dB",
    )
    if trace.cg_failures:
        logger.warning("%s: %d inner solves hit the CG cap", cfg.label, trace.cg_failures)


def pnp_pgd(
    model: ForwardModel,
    y: MulticoilKSpace,
    cfg: SolverConfig,
    monitor: Union[Monitor, None] = None,
) -> Tuple[ComplexImage, SolverTrace]:
    """
    Runs PnP proximal gradient descent.

    Parameters
    ----------
    model : ForwardModel
        The acquisition model.
    y : MulticoilKSpace
        The measured data.
    cfg : SolverConfig
        A ``pnp_pgd`` configuration.
    monitor : callable, optional
        Maps an iterate to ``(psnr, ssim)`` for the trace.

    Returns
    -------
    Tuple[ComplexImage, SolverTrace]
        The last iterate and the trace.
    """
    model.check_data(y.coils)
    gammas, sigmas, precond = _setup(model, cfg, Algorithm.PNP_PGD)
    recorder = _Recorder(model, y.coils, cfg, monitor)
    x = initial_point(model, y, cfg)
    logger.info("%s: %d iterations", cfg.label, len(gammas))
    with open_denoiser(cfg.denoiser) as denoiser:
        for k, (gamma, sigma) in enumerate(zip(gammas, sigmas)):
            grad = model.adjoint(model.op(x) - y.coils)
            u = x - gamma * precond(grad)
            _check_finite(u, k, recorder.trace, cfg.label)
            x_new = denoiser(u, sigma)
            stop = recorder.record(k, gamma, sigma, x_new, x, objective_weight=gamma)
            x = x_new
            if stop:
                break
    _finish(cfg, recorder.trace)
    return ComplexImage(x), recorder.trace


def pnp_hqs(
    model: ForwardModel,
    y: MulticoilKSpace,
    cfg: SolverConfig,
    monitor: Union[Monitor, None] = None,
) -> Tuple[ComplexImage, ComplexImage, SolverTrace]:
    """
    Runs PnP half-quadratic splitting, annealed when ``cfg.schedule`` is set.

    With the identity preconditioner and fixed parameters this is DPIR.

    Returns
    -------
    Tuple[ComplexImage, ComplexImage, SolverTrace]
        The last iterate ``x_K``, the last prox output ``u_K`` and the trace.
    """
    model.check_data(y.coils)
    gammas, sigmas, precond = _setup(model, cfg, Algorithm.PNP_HQS)
    solve = solve_prox if cfg.prox_metric is ProxMetric.DIRECT else solve_prox_inverse
    recorder = _Recorder(model, y.coils, cfg, monitor)
    x = initial_point(model, y, cfg)
    u = x
    logger.info("%s: %d iterations", cfg.label, len(gammas))
    with open_denoiser(cfg.denoiser) as denoiser:
        for k, (gamma, sigma) in enumerate(zip(gammas, sigmas)):
            try:
                cg = solve(model, y.coils, x, gamma, precond, cfg.cg_tol, cfg.cg_max_iter)
            except SolverError as exc:
                raise SolverError(f"{cfg.label} iteration {k}: {exc}", recorder.trace) from exc
            u = cg.solution
            _check_finite(u, k, recorder.trace, cfg.label)
            x_new = denoiser(u, sigma)
            stop = recorder.record(k, gamma, sigma, x_new, x, cg=cg, objective_weight=gamma)
            x = x_new
            if stop:
                break
    _finish(cfg, recorder.trace)
    return ComplexImage(x), ComplexImage(u), recorder.trace


def reconstruct(
    model: ForwardModel,
    y: MulticoilKSpace,
    cfg: SolverConfig,
    monitor: Union[Monitor, None] = None,
) -> SolverResult:
    """Dispatches on ``cfg.algorithm``."""
    if cfg.algorithm is Algorithm.PNP_PGD:
        x, trace = pnp_pgd(model, y, cfg, monitor)
        return SolverResult(x, None, trace)
    if cfg.algorithm is Algorithm.PNP_HQS:
        return SolverResult(*pnp_hqs(model, y, cfg, monitor))
    # pylint: disable=import-outside-toplevel
    from pnpmri.solve.fista import fista_wavelet

    x, trace = fista_wavelet(model, y, cfg, monitor)
    return SolverResult(x, None, trace)
