"""
Command line entry points.

    simulate     --config CASE.toml --out DIR
    reconstruct  --config CASE.toml [--case DIR] [--out DIR] [--repeat R] [--workers N]
    combine      --case DIR --out IMAGE.cimg
    n2n-train    --data DIR --out KERNEL.cimg [training options]
    n2n-apply    --kernel KERNEL.cimg --data DIR --out DIR
    verify

Exit codes: 0 success, 1 solver or training failure, 2 configuration error.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Union

from pnpmri import config
from pnpmri.bench.case import load_case
from pnpmri.bench.runner import run_bench
from pnpmri.core.cimg import read_cimg, write_cimg
from pnpmri.exceptions import (
    ConfigError,
    DenoiserError,
    DimensionError,
    EstimationError,
    FormatError,
    InvalidArgumentError,
    SolverError,
    TrainingError,
)
from pnpmri.logger import logger, set_verbose
from pnpmri.n2n.model import load_kernel, save_kernel
from pnpmri.n2n.train import TrainingConfig, n2n_train, preprocess_dataset
from pnpmri.sim.acquisition import simulate_case
from pnpmri.sim.case_io import read_case, write_case
from pnpmri.sim.combine import coil_images, virtual_coil_combine
from pnpmri.solve.verification import run_verification_suite


def _cimg_files(directory: str) -> List[Path]:
    files = sorted(Path(directory).glob("*.cimg"))
    if not files:
        raise ConfigError(f"no .cimg files in {directory}")
    return files


def cmd_simulate(args) -> int:
    """Simulates the acquisition of a case and writes its directory."""
    case = load_case(args.config)
    acq = case.acquisition
    sim = simulate_case(acq)
    meta = {
        "case": case.id,
        "shape": list(acq.shape),
        "af": acq.af,
        "shots": acq.shots,
        "samples_per_shot": acq.shot_length,
        "noise_scale": acq.noise_scale,
        "seed": acq.seed,
    }
    write_case(args.out, sim, meta)
    logger.info("Case %s written to %s", case.id, args.out)
    return config.EXIT_SUCCESS


def cmd_reconstruct(args) -> int:
    """Runs every solver of a case."""
    case = load_case(args.config)
    result = run_bench(case, args.out, args.case, args.repeat, args.workers)
    return config.EXIT_SOLVER_FAILURE if result.failures else config.EXIT_SUCCESS


def cmd_combine(args) -> int:
    """Combines the coil images of a case into one complex image."""
    sim = read_case(args.case)
    images = coil_images(sim.kspace, sim.trajectory, sim.phantom.shape)
    write_cimg(args.out, virtual_coil_combine(images))
    logger.info("Combined %d coils into %s", len(images), args.out)
    return config.EXIT_SUCCESS


def cmd_n2n_train(args) -> int:
    """Trains a kernel on a directory of noisy images."""
    try:
        cfg = TrainingConfig(
            eta=args.eta,
            steps=args.steps,
            lr=args.lr,
            seed=args.seed,
            kernel_size=args.kernel_size,
            optimizer=args.optimizer,
            draws=args.draws,
            batch_size=args.batch_size,
            patch_size=args.patch_size,
            stop_gradient=args.stop_gradient,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    dataset = [read_cimg(path) for path in _cimg_files(args.data)]
    result = n2n_train(dataset, cfg)
    save_kernel(args.out, result.denoiser)
    logger.info("Kernel written to %s", args.out)
    return config.EXIT_SUCCESS


def cmd_n2n_apply(args) -> int:
    """Denoises a directory of images with a trained kernel."""
    denoiser = load_kernel(args.kernel)
    files = _cimg_files(args.data)
    outputs = preprocess_dataset(denoiser, [read_cimg(path) for path in files])
    out = Path(args.out)
    for path, image in zip(files, outputs):
        write_cimg(out / path.name, image)
    logger.info("Denoised %d images into %s", len(outputs), out)
    return config.EXIT_SUCCESS


def cmd_verify(_args) -> int:
    """Runs the optimality and preconditioner checks."""
    passed = True
    for _, success, msg in run_verification_suite():
        print(("PASS " if success else "FAIL ") + msg)
        passed = passed and success
    return config.EXIT_SUCCESS if passed else config.EXIT_SOLVER_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pnpmri", description="Plug-and-Play MRI reconstruction")
    parser.add_argument("--verbose", action="store_true", help="log every iteration")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="simulate a case directory")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--out", required=True)
    simulate.set_defaults(func=cmd_simulate)

    recon = commands.add_parser("reconstruct", help="run the solvers of a case")
    recon.add_argument("--config", required=True)
    recon.add_argument("--case", default=None, help="case directory written by simulate")
    recon.add_argument("--out", default=None)
    recon.add_argument("--repeat", type=int, default=1)
    recon.add_argument("--workers", type=int, default=1)
    recon.set_defaults(func=cmd_reconstruct)

    combine = commands.add_parser("combine", help="virtual coil combination of a case")
    combine.add_argument("--case", required=True)
    combine.add_argument("--out", required=True)
    combine.set_defaults(func=cmd_combine)

    train = commands.add_parser("n2n-train", help="train a Neighbor2Neighbor kernel")
    train.add_argument("--data", required=True)
    train.add_argument("--out", required=True)
    train.add_argument("--eta", type=float, default=config.N2N_ETA)
    train.add_argument("--steps", type=int, default=1000)
    train.add_argument(
        "--lr", type=float, default=None, help="sgd: units of 1/L (default 1); adam: absolute"
    )
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--kernel-size", type=int, default=config.N2N_KERNEL_SIZE)
    train.add_argument("--optimizer", choices=("sgd", "adam"), default="sgd")
    train.add_argument("--draws", type=int, default=config.N2N_DRAWS)
    train.add_argument("--batch-size", type=int, default=config.N2N_BATCH_SIZE)
    train.add_argument("--patch-size", type=int, default=None)
    train.add_argument("--stop-gradient", action="store_true")
    train.set_defaults(func=cmd_n2n_train)

    apply = commands.add_parser("n2n-apply", help="denoise images with a trained kernel")
    apply.add_argument("--kernel", required=True)
    apply.add_argument("--data", required=True)
    apply.add_argument("--out", required=True)
    apply.set_defaults(func=cmd_n2n_apply)

    verify = commands.add_parser("verify", help="run the fixed point optimality checks")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Union[List[str], None] = None) -> int:
    """Parses the command line and runs a subcommand, returning its exit code."""
    args = build_parser().parse_args(argv)
    set_verbose(args.verbose)
    try:
        return args.func(args)
    except (ConfigError, FormatError, DimensionError) as exc:
        logger.error("%s", exc)
        return config.EXIT_CONFIG_ERROR
    except (
        SolverError,
        DenoiserError,
        EstimationError,
        TrainingError,
        InvalidArgumentError,
    ) as exc:
        logger.error("%s", exc)
        return config.EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
