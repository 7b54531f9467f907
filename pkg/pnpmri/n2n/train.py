"""
Self-supervised training of the SmallDenoiser and dataset preprocessing.
"""

from __future__ import annotations

from typing import List, Literal, NamedTuple, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from pnpmri import config
from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import InvalidArgumentError, TrainingError
from pnpmri.logger import logger
from pnpmri.n2n.loss import Denoiser, QuadraticTerms, quadratic_terms
from pnpmri.n2n.model import SmallDenoiser
from pnpmri.n2n.split import NeighborSplit


class TrainingConfig(BaseModel):
    """
    Hyperparameters of :func:`n2n_train`.

    ``lr`` is in units of ``1 / L``, ``L`` the curvature of the pooled loss,
    for ``sgd`` and absolute for ``adam``. It defaults per optimizer.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    eta: float = Field(default=config.N2N_ETA, ge=0.0)
    steps: int = Field(default=1000, ge=1)
    lr: Union[float, None] = Field(default=None, ge=0.0)
    seed: int = Field(default=0, ge=0)
    kernel_size: int = Field(default=config.N2N_KERNEL_SIZE, ge=1)
    optimizer: Literal["sgd", "adam"] = "sgd"
    draws: int = Field(default=config.N2N_DRAWS, ge=1)
    batch_size: int = Field(default=config.N2N_BATCH_SIZE, ge=1)
    patch_size: Union[int, None] = Field(default=None, ge=4)
    stop_gradient: bool = False

    @field_validator("kernel_size")
    @classmethod
    def _odd_kernel(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"kernel_size must be odd, got {value}")
        return value

    @field_validator("patch_size")
    @classmethod
    def _even_patch(cls, value):
        if value is not None and value % 2:
            raise ValueError(f"patch_size must be even, got {value}")
        return value

    @property
    def learning_rate(self) -> float:
        if self.lr is not None:
            return self.lr
        return config.N2N_LR if self.optimizer == "sgd" else config.N2N_ADAM_LR


class TrainingResult(NamedTuple):
    denoiser: SmallDenoiser
    losses: List[float]


class _Adam:
    def __init__(self, shape, lr: float):
        self.lr = lr
        self.beta1, self.beta2 = config.N2N_ADAM_BETAS
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def step(self, grad: np.ndarray) -> np.ndarray:
        """Returns the update for a real-valued gradient."""
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return self.lr * m_hat / (np.sqrt(v_hat) + config.N2N_ADAM_EPS)


def _crop(rng: np.random.Generator, data: np.ndarray, patch: Union[int, None]) -> np.ndarray:
    if patch is None or patch >= min(data.shape):
        return data
    # crops start on even offsets so 2x2 cells stay aligned
    top = 2 * rng.integers(0, (data.shape[0] - patch) // 2 + 1)
    left = 2 * rng.integers(0, (data.shape[1] - patch) // 2 + 1)
    return data[top : top + patch, left : left + patch]


def _draw_pool(
    dataset: Sequence[ComplexImage], cfg: TrainingConfig, rng: np.random.Generator
) -> List[QuadraticTerms]:
    """Per-pixel loss terms of ``cfg.draws`` (crop, split) draws per image."""
    pool = []
    for _ in range(cfg.draws):
        for image in dataset:
            data = _crop(rng, image.data, cfg.patch_size)
            split = NeighborSplit.draw(data.shape, rng)
            terms = quadratic_terms(data, split, cfg.kernel_size)
            pool.append(QuadraticTerms.mean([terms], [4.0 / data.size]))
    return pool


def n2n_train(dataset: Sequence[ComplexImage], cfg: TrainingConfig) -> TrainingResult:
    """
    Trains a SmallDenoiser on the Neighbor2Neighbor loss.

    The loss is averaged over a fixed pool of random (image, crop, split)
    draws. ``sgd`` runs full gradient descent on the pool with step
    ``lr / L``; ``adam`` descends minibatches of ``batch_size`` pool
    entries. After every update the pooled loss is appended to the trace,
    so with ``sgd``, ``lr < 2`` and the full gradient the trace never
    increases.

    Parameters
    ----------
    dataset : Sequence[ComplexImage]
        Noisy images with even sides.
    cfg : TrainingConfig
        Hyperparameters.

    Returns
    -------
    TrainingResult
        The trained denoiser and the per-step loss trace.
    """
    if not dataset:
        raise InvalidArgumentError("training needs a nonempty dataset")
    rng = np.random.default_rng(cfg.seed)
    pool = _draw_pool(dataset, cfg, rng)
    pooled = QuadraticTerms.mean(pool, np.ones(len(pool)))
    lr = cfg.learning_rate
    curvature = 2.0 * float(np.linalg.eigvalsh(pooled.hessian(cfg.eta))[-1])
    step_size = lr / curvature if curvature > 0 else 0.0
    model = SmallDenoiser.identity(cfg.kernel_size)
    adam = _Adam(model.theta.view(np.float64).shape, lr) if cfg.optimizer == "adam" else None
    initial = pooled.value(model.theta, cfg.eta)
    losses: List[float] = []
    logger.info(
        "Training %dx%d kernel on %d draws of %d images (%s, %d steps, lr=%g, eta=%g)",
        cfg.kernel_size, cfg.kernel_size, len(pool), len(dataset),
        cfg.optimizer, cfg.steps, lr, cfg.eta,
    )
    for step in range(cfg.steps):
        if adam is None:
            grad = pooled.gradient(model.theta, cfg.eta, cfg.stop_gradient)
            update = step_size * grad
        else:
            batch = [pool[i] for i in rng.integers(0, len(pool), size=cfg.batch_size)]
            grad = QuadraticTerms.mean(batch, np.ones(len(batch))).gradient(
                model.theta, cfg.eta, cfg.stop_gradient
            )
            update = adam.step(np.ascontiguousarray(grad).view(np.float64)).view(np.complex128)
        model = SmallDenoiser(model.theta - update)
        loss = pooled.value(model.theta, cfg.eta)
        if not np.isfinite(loss) or loss > config.N2N_DIVERGENCE_FACTOR * initial:
            raise TrainingError(f"loss diverged to {loss:g} at step {step}")
        losses.append(loss)
        logger.debug("n2n step %d: loss %.6e", step, loss)
    logger.info("Training done: loss %.6e -> %.6e", initial, losses[-1])
    return TrainingResult(model, losses)


def preprocess_dataset(f: Denoiser, dataset: Sequence[ComplexImage]) -> List[ComplexImage]:
    """Denoises every image of a dataset."""
    return [ComplexImage(f(x.data)) for x in dataset]
