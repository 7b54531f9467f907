"""
Fourier and coil operators, the data-fidelity functional and its gradient.
"""

from pnpmri.operators.forward_model import (
    ForwardModel,
    fidelity,
    forward,
    grad_f,
    zero_filled,
)
from pnpmri.operators.ndft import NDFTPlan, ndft_adjoint, ndft_forward
from pnpmri.operators.spectral import (
    PowerIterationResult,
    estimate_operator_norm,
    power_iteration,
)

__all__ = [
    "ForwardModel",
    "NDFTPlan",
    "PowerIterationResult",
    "estimate_operator_norm",
    "fidelity",
    "forward",
    "grad_f",
    "ndft_adjoint",
    "ndft_forward",
    "power_iteration",
    "zero_filled",
]
