"""
Contains the exceptions raised by pnpmri.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from pnpmri.core.types import SolverTrace


class DimensionError(ValueError):
    """
    Raised when array shapes or lengths do not agree.
    """

    def __init__(self, msg: str):
        super().__init__(f"Dimension mismatch: {msg}.")


class InvalidArgumentError(ValueError):
    """
    Raised when an argument violates an operation precondition.
    """

    def __init__(self, msg: str):
        super().__init__(f"Invalid argument: {msg}.")


class FormatError(Exception):
    """
    Raised when a file does not follow the expected layout.
    """

    def __init__(self, msg: str):
        super().__init__(f"Malformed file: {msg}.")


class EstimationError(Exception):
    """
    Raised when sensitivity maps or the operator norm could not be estimated.
    """

    def __init__(self, msg: str):
        super().__init__(f"Estimation failed: {msg}.")


class DenoiserError(Exception):
    """
    Raised when a denoiser could not be applied.
    """

    def __init__(self, msg: str):
        super().__init__(f"Could not apply the denoiser: {msg}.")


class SolverError(Exception):
    """
    Raised when a reconstruction solver could not complete.

    Parameters
    ----------
    msg : str
        The failure description.
    trace : SolverTrace, optional
        The iterations recorded before the failure.
    """

    def __init__(self, msg: str, trace: Union[SolverTrace, None] = None):
        super().__init__(f"Solver failed: {msg}.")
        self.trace = trace


class DivergenceError(SolverError):
    """
    Raised when an iterate stops being finite.
    """


class TrainingError(Exception):
    """
    Raised when the denoiser training diverges.
    """

    def __init__(self, msg: str):
        super().__init__(f"Training failed: {msg}.")


class ConfigError(Exception):
    """
    Raised when a benchmark configuration is invalid.
    """

    def __init__(self, msg: str):
        super().__init__(f"Invalid configuration: {msg}.")
