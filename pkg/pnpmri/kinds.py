"""
Kind enums shared by configuration models and dispatchers.
"""
import enum


class DenoiserKind(str, enum.Enum):
    """
    Enum for the denoiser kind.
    """

    IDENTITY = "identity"
    SOFT_THRESHOLD = "soft_threshold"
    WAVELET_SOFT_THRESHOLD = "wavelet_soft_threshold"
    EXTERNAL = "external"


class PreconditionerKind(str, enum.Enum):
    """
    Enum for the preconditioner kind.
    """

    IDENTITY = "identity"
    F1 = "f1"
    CHEBYSHEV = "chebyshev"


class Algorithm(str, enum.Enum):
    """
    Enum for the reconstruction algorithm.
    """

    PNP_PGD = "pnp_pgd"
    PNP_HQS = "pnp_hqs"
    FISTA_WAVELET = "fista_wavelet"


class ProxMetric(str, enum.Enum):
    """
    Enum for the metric of the HQS data step.

    ``direct`` weights the distance to ``x`` by ``P``; ``inverse`` weights
    it by ``P^{-1}``, the metric in which a preconditioned gradient step
    ``x - gamma P grad f`` is a proximal step.
    """

    DIRECT = "direct"
    INVERSE = "inverse"
