"""
Reads and writes the simulated case directory layout:

- ``phantom.cimg`` and ``mask.cimg`` (mask in the real part, 0 or 1)
- ``smap_<l>.cimg`` for each coil, ``l`` counted from 0
- ``traj.csv`` with columns ``kx,ky,weight``
- ``kspace_<l>.csv`` with columns ``re,im``
- ``meta.json`` with the acquisition parameters and noise variance
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from pnpmri.core.cimg import read_cimg, write_cimg
from pnpmri.core.types import ComplexImage, MulticoilKSpace, SensitivityMaps, Trajectory
from pnpmri.exceptions import FormatError
from pnpmri.sim.acquisition import SimulatedCase

PathLike = Union[str, Path]

_FLOAT_FMT = "%.17g"


def write_case(out_dir: PathLike, case: SimulatedCase, meta: Dict[str, Any]):
    """
    Writes a simulated case.

    Parameters
    ----------
    out_dir : str or Path
        The case directory, created if missing.
    case : SimulatedCase
        The simulated acquisition.
    meta : Dict[str, Any]
        Extra JSON-serializable parameters stored in ``meta.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_cimg(out / "phantom.cimg", case.phantom)
    write_cimg(out / "mask.cimg", ComplexImage(case.mask.astype(np.float64)))
    for coil in range(case.smaps.n_coils):
        write_cimg(out / f"smap_{coil}.cimg", case.smaps.coil(coil))
    traj = np.column_stack([case.trajectory.points, case.trajectory.density_weights])
    np.savetxt(
        out / "traj.csv", traj, fmt=_FLOAT_FMT, delimiter=",", header="kx,ky,weight", comments=""
    )
    for coil in range(case.kspace.n_coils):
        data = case.kspace.coils[coil]
        np.savetxt(
            out / f"kspace_{coil}.csv",
            np.column_stack([data.real, data.imag]),
            fmt=_FLOAT_FMT,
            delimiter=",",
            header="re,im",
            comments="",
        )
    meta = dict(meta, noise_variance=case.kspace.noise_variance, coils=case.smaps.n_coils)
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))


def _load_csv(path: Path, columns: int) -> np.ndarray:
    if not path.is_file():
        raise FormatError(f"{path} does not exist")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != columns:
        raise FormatError(f"{path} has {data.shape[1]} columns, expected {columns}")
    return data


def read_meta(case_dir: PathLike) -> Dict[str, Any]:
    """Reads ``meta.json``."""
    path = Path(case_dir) / "meta.json"
    if not path.is_file():
        raise FormatError(f"{path} does not exist")
    return json.loads(path.read_text())


def read_case(case_dir: PathLike) -> SimulatedCase:
    """Loads a case directory written by :func:`write_case`."""
    case_dir = Path(case_dir)
    meta = read_meta(case_dir)
    n_coils = int(meta["coils"])
    phantom = read_cimg(case_dir / "phantom.cimg")
    mask = read_cimg(case_dir / "mask.cimg").data.real > 0.5
    maps = np.stack([read_cimg(case_dir / f"smap_{coil}.cimg").data for coil in range(n_coils)])
    traj = _load_csv(case_dir / "traj.csv", 3)
    coils = []
    for coil in range(n_coils):
        data = _load_csv(case_dir / f"kspace_{coil}.csv", 2)
        coils.append(data[:, 0] + 1j * data[:, 1])
    return SimulatedCase(
        phantom=phantom,
        mask=mask,
        smaps=SensitivityMaps.masked(maps, np.any(maps != 0, axis=0) | mask),
        trajectory=Trajectory(traj[:, :2], traj[:, 2]),
        kspace=MulticoilKSpace(np.stack(coils), float(meta["noise_variance"])),
    )
