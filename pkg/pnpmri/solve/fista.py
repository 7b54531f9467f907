"""
The FISTA baseline for ``f(x) + lambda_reg * ||W_detail x||_1``.

Acceleration is the monotone variant: the accepted iterate is the better of
the proximal candidate and the previous iterate, so the objective never
increases.
"""

from typing import Tuple, Union

import numpy as np

from pnpmri.core.types import ComplexImage, MulticoilKSpace, SolverTrace, TraceEntry
from pnpmri.exceptions import DivergenceError, InvalidArgumentError
from pnpmri.kinds import Algorithm
from pnpmri.logger import logger
from pnpmri.operators.forward_model import ForwardModel
from pnpmri.priors import wavelet as wt
from pnpmri.priors.denoisers import wavelet_shrink
from pnpmri.solve.pnp import Monitor, initial_point
from pnpmri.solve.settings import SolverConfig


def wavelet_l1(x: np.ndarray, wavelet: str, levels: int) -> float:
    """``||W_detail x||_1`` with complex moduli."""
    coeffs, slices = wt.analysis(x, wavelet, levels)
    return float(np.sum(np.abs(coeffs[wt.detail_mask(coeffs.shape, slices)])))


def fista_wavelet(
    model: ForwardModel,
    y: MulticoilKSpace,
    cfg: SolverConfig,
    monitor: Union[Monitor, None] = None,
) -> Tuple[ComplexImage, SolverTrace]:
    """
    Runs FISTA (``cfg.accelerate``) or ISTA with step ``gamma_scale /
    lambda_max`` and threshold ``gamma * lambda_reg``.

    The trace ``sigma`` column holds the threshold and ``objective`` the
    composite objective.
    """
    if cfg.algorithm is not Algorithm.FISTA_WAVELET:
        raise InvalidArgumentError(f"config is for {cfg.algorithm.value}, not fista_wavelet")
    model.check_data(y.coils)
    wavelet, levels = cfg.denoiser.wavelet, cfg.denoiser.levels
    wt.check_shape(model.shape, levels)
    data = y.coils
    gamma = cfg.gamma if cfg.gamma is not None else (cfg.gamma_scale or 1.0) / model.lipschitz()
    tau = gamma * cfg.lambda_reg

    def fidelity(x):
        residual = model.op(x) - data
        return 0.5 * float(np.vdot(residual, residual).real)

    def objective(x):
        if cfg.lambda_reg == 0:
            return fidelity(x)
        return fidelity(x) + cfg.lambda_reg * wavelet_l1(x, wavelet, levels)

    def prox_step(z):
        v = z - gamma * model.adjoint(model.op(z) - data)
        return v if tau == 0 else wavelet_shrink(v, tau, wavelet, levels)

    trace = SolverTrace()
    x = initial_point(model, y, cfg)
    z = x
    t = 1.0
    current = objective(x)
    logger.info("%s: %d iterations, gamma=%.3e, tau=%.3e", cfg.label, cfg.n_iter, gamma, tau)
    for k in range(cfg.n_iter):
        candidate = prox_step(z if cfg.accelerate else x)
        if not np.all(np.isfinite(candidate)):
            raise DivergenceError(f"{cfg.label} iterate {k} is not finite", trace)
        value = objective(candidate)
        if cfg.accelerate:
            x_new, new_value = (candidate, value) if value <= current else (x, current)
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            z = x_new + (t / t_new) * (candidate - x_new) + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        else:
            x_new, new_value = candidate, value
        dx = float(np.linalg.norm(x_new - x))
        psnr = ssim = None
        if monitor is not None:
            psnr, ssim = monitor(x_new)
        trace.append(
            TraceEntry(
                k=k,
                gamma=gamma,
                sigma=tau,
                fidelity=fidelity(x_new),
                dx=dx,
                psnr=psnr,
                ssim=ssim,
                objective=new_value,
            )
        )
        logger.debug("%s k=%d objective=%.9e dx=%.3e", cfg.label, k, new_value, dx)
        x, current = x_new, new_value
    logger.info("%s finished: objective %.6e", cfg.label, current)
    return ComplexImage(x), trace
