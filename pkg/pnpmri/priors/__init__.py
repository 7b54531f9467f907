"""
Denoisers ``D_sigma`` for Plug-and-Play iterations.
"""

from pnpmri.priors.denoisers import (
    BuiltinDenoiser,
    DenoiserSpec,
    denoise,
    denoise_array,
    open_denoiser,
    soft_threshold,
    wavelet_shrink,
)
from pnpmri.priors.external import (
    ExternalDenoiser,
    check_zero_sigma,
    parse_header,
    request_header,
)
from pnpmri.priors.functionals import moreau_envelope, regularizer_value, subgradient_distance

__all__ = [
    "BuiltinDenoiser",
    "DenoiserSpec",
    "ExternalDenoiser",
    "check_zero_sigma",
    "denoise",
    "denoise_array",
    "moreau_envelope",
    "open_denoiser",
    "parse_header",
    "regularizer_value",
    "request_header",
    "soft_threshold",
    "subgradient_distance",
    "wavelet_shrink",
]
