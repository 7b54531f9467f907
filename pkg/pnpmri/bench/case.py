"""
Benchmark case files.

A case is a TOML file with a ``[case]`` table, an ``[acquisition]`` table and
one ``[[solver]]`` table per reconstruction; see ``doc/case_format.md``.
"""

from __future__ import annotations

import os
import tomllib
from pathlib import Path
from typing import List, Literal, Mapping, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from pnpmri import config
from pnpmri.exceptions import ConfigError
from pnpmri.sim.acquisition import AcquisitionConfig
from pnpmri.solve.settings import SolverConfig

PathLike = Union[str, Path]


class BenchCase(BaseModel):
    """
    One experimental grid: a single acquisition shared by every solver.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    acquisition: AcquisitionConfig = Field(default_factory=AcquisitionConfig)
    solvers: List[SolverConfig] = Field(min_length=1)
    reference: Union[str, None] = None
    out_dir: Union[str, None] = None
    smaps: Literal["true", "estimated"] = "true"
    smap_window: int = Field(default=config.SMAP_WINDOW, ge=1)

    @field_validator("solvers")
    @classmethod
    def _unique_labels(cls, solvers: List[SolverConfig]) -> List[SolverConfig]:
        labels = [cfg.label for cfg in solvers]
        duplicated = sorted({label for label in labels if labels.count(label) > 1})
        if duplicated:
            raise ValueError(f"solver names must be unique, repeated: {duplicated}")
        return solvers


def parse_case(data: Mapping, env: Union[Mapping[str, str], None] = None) -> BenchCase:
    """
    Validates a parsed TOML document.

    The ``PNP_SEED`` variable of ``env`` (the process environment by
    default) overrides the acquisition seed.
    """
    env = os.environ if env is None else env
    fields = dict(data.get("case", {}))
    acquisition = dict(data.get("acquisition", {}))
    if config.SEED_ENV_VAR in env:
        try:
            acquisition["seed"] = int(env[config.SEED_ENV_VAR])
        except ValueError as exc:
            raise ConfigError(
                f"{config.SEED_ENV_VAR}={env[config.SEED_ENV_VAR]!r} is not an integer"
            ) from exc
    fields["acquisition"] = acquisition
    fields["solvers"] = list(data.get("solver", []))
    try:
        return BenchCase.model_validate(fields)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_case(path: PathLike, env: Union[Mapping[str, str], None] = None) -> BenchCase:
    """Reads and validates a case file."""
    try:
        with open(path, "rb") as file:
            data = tomllib.load(file)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path} is not valid TOML: {exc}") from exc
    return parse_case(data, env)
