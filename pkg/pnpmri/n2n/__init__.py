"""
Neighbor2Neighbor self-supervised denoising of complex images.
"""

from pnpmri.n2n.loss import QuadraticTerms, loss_and_grad, n2n_loss, quadratic_terms, residuals
from pnpmri.n2n.model import SmallDenoiser, load_kernel, patch_matrix, save_kernel
from pnpmri.n2n.split import ORDERED_PAIRS, NeighborSplit, neighbor_subsample, pick
from pnpmri.n2n.train import TrainingConfig, TrainingResult, n2n_train, preprocess_dataset

__all__ = [
    "ORDERED_PAIRS",
    "QuadraticTerms",
    "NeighborSplit",
    "SmallDenoiser",
    "TrainingConfig",
    "TrainingResult",
    "load_kernel",
    "loss_and_grad",
    "n2n_loss",
    "n2n_train",
    "neighbor_subsample",
    "patch_matrix",
    "pick",
    "preprocess_dataset",
    "quadratic_terms",
    "residuals",
    "save_kernel",
]
