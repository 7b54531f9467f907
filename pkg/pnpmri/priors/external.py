"""
Client side of the external denoiser protocol.

Each request is the line ``DNZ1 <height> <width> <sigma>\\n`` followed by the
headerless CIMG payload on the child's standard input; the reply is the same
layout on its standard output. The reply header must name the request's
height, width and sigma, the latter to a relative 1e-5, in any float spelling.
The child persists across calls and serves one request at a time.
"""

from __future__ import annotations

import collections
import subprocess
import threading
from typing import Deque, Tuple, Union

import numpy as np

from pnpmri.core.cimg import from_payload, to_payload
from pnpmri.exceptions import DenoiserError, FormatError, InvalidArgumentError
from pnpmri.kinds import DenoiserKind
from pnpmri.logger import logger
from pnpmri.priors.denoisers import DenoiserSpec

_MAGIC = "DNZ1"
_STDERR_LINES = 20
# replies may print sigma with fewer digits than the request
_SIGMA_RTOL = 1e-5


def request_header(height: int, width: int, sigma: float) -> bytes:
    """Encodes the request header line; sigma is written as ``repr(float)``."""
    return f"{_MAGIC} {height} {width} {float(sigma)!r}\n".encode("utf-8")


def parse_header(line: bytes) -> Tuple[int, int, float]:
    """
    Decodes a header line into ``(height, width, sigma)``.

    Fields may be separated by any whitespace and the line may end in
    ``\\r\\n``; sigma is any float literal.
    """
    fields = line.split()
    if len(fields) != 4 or fields[0] != _MAGIC.encode("ascii"):
        raise FormatError(f"bad denoiser header {line!r}")
    try:
        return int(fields[1]), int(fields[2]), float(fields[3])
    except ValueError as exc:
        raise FormatError(f"bad denoiser header {line!r}") from exc


class ExternalDenoiser:
    """
    A denoiser served by a child process.

    Parameters
    ----------
    spec : DenoiserSpec
        An external denoiser configuration.
    """

    def __init__(self, spec: DenoiserSpec):
        if spec.kind is not DenoiserKind.EXTERNAL:
            raise InvalidArgumentError("ExternalDenoiser needs an external spec")
        self.spec = spec
        self._proc: Union[subprocess.Popen, None] = None
        self._lock = threading.Lock()
        self._stderr: Deque[str] = collections.deque(maxlen=_STDERR_LINES)

    def _drain_stderr(self, stream):
        for line in iter(stream.readline, b""):
            self._stderr.append(line.decode("utf-8", errors="replace").rstrip())

    def _diagnostic(self) -> str:
        code = None if self._proc is None else self._proc.poll()
        tail = " | ".join(self._stderr) or "no stderr output"
        return f"exit code {code}, stderr: {tail}"

    def start(self):
        """Starts the child process if it is not running."""
        if self._proc is not None and self._proc.poll() is None:
            return
        command = [str(self.spec.executable), *self.spec.args]
        try:
            self._proc = subprocess.Popen(  # pylint: disable=consider-using-with
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                cwd=self.spec.workdir,
            )
        except OSError as exc:
            raise DenoiserError(f"could not start {command}: {exc}") from exc
        threading.Thread(
            target=self._drain_stderr, args=(self._proc.stderr,), daemon=True
        ).start()
        logger.info("External denoiser started: %s (pid %s)", command, self._proc.pid)

    def _read_reply(self, nbytes: int) -> bytes:
        assert self._proc is not None and self._proc.stdout is not None
        result = {}

        def _read():
            try:
                header = self._proc.stdout.readline()
                result["header"] = header
                result["payload"] = self._proc.stdout.read(nbytes)
            except (OSError, ValueError) as exc:
                result["error"] = exc

        reader = threading.Thread(target=_read, daemon=True)
        reader.start()
        reader.join(self.spec.timeout)
        if reader.is_alive():
            self._proc.kill()
            raise DenoiserError(f"no reply within {self.spec.timeout} s ({self._diagnostic()})")
        if "error" in result:
            raise DenoiserError(f"broken reply stream: {result['error']} ({self._diagnostic()})")
        return result["header"] + result["payload"]

    def _check_reply_header(self, line: bytes, height: int, width: int, sigma: float):
        try:
            got_height, got_width, got_sigma = parse_header(line)
        except FormatError as exc:
            raise DenoiserError(f"malformed reply header {line!r} ({self._diagnostic()})") from exc
        if (got_height, got_width) != (height, width):
            raise DenoiserError(f"reply is {got_height}x{got_width}, request was {height}x{width}")
        if abs(got_sigma - sigma) > _SIGMA_RTOL * abs(sigma):
            raise DenoiserError(f"reply answers sigma {got_sigma!r}, request was {sigma!r}")

    def __call__(self, data: np.ndarray, sigma: float) -> np.ndarray:
        """
        Sends one image and waits for the denoised reply.

        Parameters
        ----------
        data : np.ndarray
            An ``(H, W)`` complex array.
        sigma : float
            The noise level, nonnegative.
        """
        if sigma < 0:
            raise InvalidArgumentError(f"noise level must be nonnegative, got {sigma}")
        height, width = data.shape
        header = request_header(height, width, sigma)
        with self._lock:
            self.start()
            assert self._proc is not None and self._proc.stdin is not None
            try:
                self._proc.stdin.write(header + to_payload(data))
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise DenoiserError(f"could not send request: {exc} ({self._diagnostic()})") from exc
            raw = self._read_reply(height * width * 16)
        newline = raw.find(b"\n")
        if newline < 0:
            raise DenoiserError(f"reply has no header line ({self._diagnostic()})")
        self._check_reply_header(raw[: newline + 1], height, width, sigma)
        try:
            reply = from_payload(raw[newline + 1 :], height, width)
        except FormatError as exc:
            raise DenoiserError(f"{exc} ({self._diagnostic()})") from exc
        if not np.all(np.isfinite(reply)):
            raise DenoiserError("reply contains NaN or Inf values")
        return reply

    def close(self):
        """Closes the child's input and waits for it to exit."""
        if self._proc is None:
            return
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
            self._proc.wait(timeout=self.spec.timeout)
        except subprocess.TimeoutExpired:
            self._proc.kill()
        except BrokenPipeError:
            pass
        finally:
            self._proc = None

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()


def check_zero_sigma(handle, data: np.ndarray) -> bool:
    """Checks the contract ``D(u, 0) == u`` bit for bit."""
    return bool(np.array_equal(handle(data, 0.0), data))
