"""
Metrics, benchmark cases and the command line.
"""

from pnpmri.bench.case import BenchCase, load_case, parse_case
from pnpmri.bench.metrics import cap_psnr, make_monitor, psnr_array, psnr_roi, ssim, ssim_array
from pnpmri.bench.runner import BenchResult, SolverRow, prepare, run_bench, run_solver

__all__ = [
    "BenchCase",
    "BenchResult",
    "SolverRow",
    "cap_psnr",
    "load_case",
    "make_monitor",
    "parse_case",
    "prepare",
    "psnr_array",
    "psnr_roi",
    "run_bench",
    "run_solver",
    "ssim",
    "ssim_array",
]
