"""
Reconstruction algorithms: preconditioners, the metric proximal operator of
the data fidelity, PnP-PGD, annealed PnP-HQS, the FISTA baseline and fixed
point optimality checks.
"""

from pnpmri.solve.cg import (
    CGResult,
    conjugate_gradient,
    prox_f_metric,
    solve_prox,
    solve_prox_inverse,
)
from pnpmri.solve.fista import fista_wavelet, wavelet_l1
from pnpmri.solve.pnp import Monitor, SolverResult, initial_point, pnp_hqs, pnp_pgd, reconstruct
from pnpmri.solve.preconditioners import Preconditioner, apply_preconditioner, spectral_radius_scan
from pnpmri.solve.settings import AnnealingSchedule, SolverConfig
from pnpmri.solve.verification import (
    OptimalityReport,
    run_verification_suite,
    toy_problem,
    verify_proposition1,
)

__all__ = [
    "AnnealingSchedule",
    "CGResult",
    "Monitor",
    "OptimalityReport",
    "Preconditioner",
    "SolverConfig",
    "SolverResult",
    "apply_preconditioner",
    "conjugate_gradient",
    "fista_wavelet",
    "initial_point",
    "pnp_hqs",
    "pnp_pgd",
    "prox_f_metric",
    "reconstruct",
    "run_verification_suite",
    "solve_prox",
    "solve_prox_inverse",
    "spectral_radius_scan",
    "toy_problem",
    "verify_proposition1",
    "wavelet_l1",
]
