"""
Benchmark orchestration: one acquisition, every solver config, per-solver
artifacts and summary tables.

Output layout under the case output directory::

    <solver>/trace.csv      k,gamma,sigma,fidelity,dx,psnr,ssim
    <solver>/recon.cimg     final iterate
    <solver>/residual.cimg  recon - reference
    <solver>/recon.pgm      magnitude preview over [0, max |ref|]
    zero_filled/recon.cimg  density-compensated adjoint baseline
    zero_filled/recon.pgm
    baseline.csv            case,af,psnr,ssim of the baseline
    table.csv               one row per solver, byte-reproducible
    timing.csv              wall time per solver
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, NamedTuple, Sequence, Union

import numpy as np

from pnpmri.bench.case import BenchCase
from pnpmri.bench.metrics import cap_psnr, make_monitor, psnr_array, ssim_array
from pnpmri.core.cimg import read_cimg, write_cimg, write_pgm
from pnpmri.core.types import ComplexImage, MulticoilKSpace, SolverTrace
from pnpmri.exceptions import (
    DenoiserError,
    DimensionError,
    EstimationError,
    InvalidArgumentError,
    SolverError,
)
from pnpmri.logger import logger
from pnpmri.operators.forward_model import ForwardModel, zero_filled
from pnpmri.response import Response, new_error_response, new_response
from pnpmri.sim.acquisition import simulate_case
from pnpmri.sim.case_io import read_case
from pnpmri.sim.coils import estimate_smaps
from pnpmri.solve.pnp import reconstruct
from pnpmri.solve.settings import SolverConfig

PathLike = Union[str, Path]

TRACE_COLUMNS = ("k", "gamma", "sigma", "fidelity", "dx", "psnr", "ssim")
TABLE_COLUMNS = ("solver", "algorithm", "preconditioner", "af", "psnr", "ssim", "iterations", "status")


class Prepared(NamedTuple):
    """The shared, read-only inputs of one trial."""

    model: ForwardModel
    y: MulticoilKSpace
    reference: np.ndarray
    mask: np.ndarray
    af: float


class SolverRow(NamedTuple):
    solver: str
    algorithm: str
    preconditioner: str
    af: float
    psnr: float
    ssim: float
    iterations: int
    wall_ms: float


class BenchResult(NamedTuple):
    rows: List[Response]
    baseline_psnr: float
    baseline_ssim: float
    out_dir: Path

    @property
    def failures(self) -> int:
        return sum(1 for _, success, _ in self.rows if not success)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.17g}"
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_trace(path: Path, trace: SolverTrace):
    """Writes a trace as CSV, PSNR capped for the file."""
    rows = [
        (e.k, e.gamma, e.sigma, e.fidelity, e.dx, cap_psnr(e.psnr), e.ssim) for e in trace
    ]
    _write_csv(path, TRACE_COLUMNS, rows)


def prepare(case: BenchCase, trial: int = 0, case_dir: Union[PathLike, None] = None) -> Prepared:
    """
    Loads or simulates the acquisition of one trial and builds the model.

    Trials simulate with ``seed + trial``. With estimated maps the metric
    reference is the coil-weighted truth ``x * sqrt(sum_l |S_l|^2)``.
    """
    if case_dir is not None:
        sim = read_case(case_dir)
    else:
        acquisition = case.acquisition.model_copy(update={"seed": case.acquisition.seed + trial})
        sim = simulate_case(acquisition)
    reference = sim.phantom.data
    if case.reference is not None:
        reference = read_cimg(case.reference).data
        if reference.shape != sim.phantom.shape:
            raise DimensionError(f"reference {reference.shape} vs case {sim.phantom.shape}")
    smaps = sim.smaps
    if case.smaps == "estimated":
        reference = reference * np.sqrt(sim.smaps.sum_of_squares())
        smaps = estimate_smaps(
            sim.kspace, sim.trajectory, sim.phantom.shape, case.smap_window, sim.mask
        )
    shape = sim.phantom.shape
    af = shape[0] * shape[1] / len(sim.trajectory)
    model = ForwardModel(sim.trajectory, smaps)
    return Prepared(model, sim.kspace, reference, sim.mask, af)


def _write_images(out: Path, x: np.ndarray, reference: np.ndarray):
    write_cimg(out / "recon.cimg", ComplexImage(x))
    write_pgm(out / "recon.pgm", np.abs(x), float(np.abs(reference).max()))


def run_solver(cfg: SolverConfig, prep: Prepared, out: Union[Path, None] = None) -> Response:
    """
    Runs one solver and scores it; failures come back as error responses.
    Artifacts are written when ``out`` is given.
    """
    monitor = make_monitor(prep.reference, prep.mask)
    start = time.monotonic()
    try:
        result = reconstruct(prep.model, prep.y, cfg, monitor)
    except (
        SolverError,
        DenoiserError,
        DimensionError,
        EstimationError,
        InvalidArgumentError,
    ) as exc:
        logger.warning("%s failed: %s", cfg.label, exc)
        trace = getattr(exc, "trace", None)
        if out is not None and trace:
            write_trace(out / "trace.csv", trace)
        return new_error_response(f"{cfg.label}: {exc}")
    wall_ms = 1000.0 * (time.monotonic() - start)
    x = result.x.data
    row = SolverRow(
        solver=cfg.label,
        algorithm=cfg.algorithm.value,
        preconditioner=cfg.preconditioner.value,
        af=prep.af,
        psnr=psnr_array(x, prep.reference, prep.mask),
        ssim=ssim_array(x, prep.reference),
        iterations=len(result.trace),
        wall_ms=wall_ms,
    )
    if out is not None:
        write_trace(out / "trace.csv", result.trace)
        _write_images(out, x, prep.reference)
        write_cimg(out / "residual.cimg", ComplexImage(x - prep.reference))
    logger.info("%s: PSNR %.3f dB, SSIM %.4f (%.0f ms)", cfg.label, row.psnr, row.ssim, wall_ms)
    return new_response(row)


def _mean_rows(trials: List[Response]) -> Response:
    failed = [msg for _, success, msg in trials if not success]
    if failed:
        return new_error_response(failed[0])
    rows = [data for data, _, _ in trials]
    first = rows[0]
    return new_response(
        first._replace(
            psnr=float(np.mean([r.psnr for r in rows])),
            ssim=float(np.mean([r.ssim for r in rows])),
            wall_ms=float(np.mean([r.wall_ms for r in rows])),
        )
    )


def run_bench(
    case: BenchCase,
    out_dir: Union[PathLike, None] = None,
    case_dir: Union[PathLike, None] = None,
    repeat: int = 1,
    workers: int = 1,
) -> BenchResult:
    """
    Runs every solver of a case and writes the result set.

    Parameters
    ----------
    case : BenchCase
        The case description.
    out_dir : str or Path, optional
        Output directory; defaults to ``case.out_dir`` and then
        ``results/<case id>``.
    case_dir : str or Path, optional
        A directory written by ``simulate``; simulated in memory otherwise.
    repeat : int
        Number of trials with consecutive seeds; tables hold the means and
        artifacts come from the first trial.
    workers : int
        Solver threads per trial.

    Returns
    -------
    BenchResult
        One response per solver, in config order, and the baseline scores.
    """
    if repeat < 1 or workers < 1:
        raise InvalidArgumentError("repeat and workers must be >= 1")
    if case_dir is not None and repeat > 1:
        logger.warning("Loaded case data cannot be re-drawn; running a single trial")
        repeat = 1
    out = Path(out_dir or case.out_dir or Path("results") / case.id)
    per_solver: List[List[Response]] = [[] for _ in case.solvers]
    baseline = []
    for trial in range(repeat):
        prep = prepare(case, trial, case_dir)
        zf = zero_filled(prep.model, prep.y).data
        baseline.append((psnr_array(zf, prep.reference, prep.mask), ssim_array(zf, prep.reference)))
        if trial == 0:
            _write_images(out / "zero_filled", zf, prep.reference)
        # shared before the workers start
        prep.model.lipschitz()

        def _run(indexed, prep=prep, trial=trial):
            index, cfg = indexed
            return index, run_solver(cfg, prep, out / cfg.label if trial == 0 else None)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for index, response in pool.map(_run, enumerate(case.solvers)):
                per_solver[index].append(response)

    rows = [_mean_rows(trials) for trials in per_solver]
    base_psnr = float(np.mean([b[0] for b in baseline]))
    base_ssim = float(np.mean([b[1] for b in baseline]))
    _write_csv(
        out / "baseline.csv",
        ("case", "af", "psnr", "ssim"),
        [(case.id, prep.af, cap_psnr(base_psnr), base_ssim)],
    )
    table, timing = [], []
    for cfg, (data, success, msg) in zip(case.solvers, rows):
        if success:
            table.append(
                (data.solver, data.algorithm, data.preconditioner, data.af,
                 cap_psnr(data.psnr), data.ssim, data.iterations, "ok")
            )
            timing.append((data.solver, f"{data.wall_ms:.3f}"))
        else:
            table.append(
                (cfg.label, cfg.algorithm.value, cfg.preconditioner.value, prep.af,
                 math.nan, math.nan, 0, f"failed: {msg}")
            )
    _write_csv(out / "table.csv", TABLE_COLUMNS, table)
    _write_csv(out / "timing.csv", ("solver", "wall_ms"), timing)
    result = BenchResult(rows, base_psnr, base_ssim, out)
    logger.info(
        "Case %s done: %d solvers, %d failed, zero-filled PSNR %.3f dB, results in %s",
        case.id, len(rows), result.failures, base_psnr, out,
    )
    return result
