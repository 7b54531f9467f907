"""
The CIMG binary image format and a PGM magnitude exporter.

A CIMG file is a UTF-8 header line ``CIMG <height> <width>\\n`` followed by
``height * width`` interleaved ``(re, im)`` little-endian float64 pairs in
row-major order. The headerless payload is shared with the external denoiser
protocol.
"""

from pathlib import Path
from typing import Union

import numpy as np

from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import FormatError

PathLike = Union[str, Path]

_MAGIC = "CIMG"
_PAYLOAD_DTYPE = np.dtype("<c16")


def to_payload(data: np.ndarray) -> bytes:
    """Serializes a complex array as interleaved little-endian float64."""
    return np.ascontiguousarray(data, dtype=_PAYLOAD_DTYPE).tobytes()


def from_payload(raw: bytes, height: int, width: int) -> np.ndarray:
    """Parses a headerless payload into an ``(height, width)`` array."""
    expected = height * width * _PAYLOAD_DTYPE.itemsize
    if len(raw) != expected:
        raise FormatError(f"expected {expected} payload bytes, got {len(raw)}")
    data = np.frombuffer(raw, dtype=_PAYLOAD_DTYPE).reshape(height, width)
    return data.astype(np.complex128)


def encode_cimg(img: ComplexImage) -> bytes:
    """Encodes an image, header included."""
    header = f"{_MAGIC} {img.height} {img.width}\n".encode("utf-8")
    return header + to_payload(img.data)


def decode_cimg(raw: bytes) -> ComplexImage:
    """Decodes the bytes of a CIMG file."""
    newline = raw.find(b"\n")
    if newline < 0:
        raise FormatError("missing CIMG header line")
    fields = raw[:newline].decode("utf-8").split()
    if len(fields) != 3 or fields[0] != _MAGIC:
        raise FormatError(f"bad CIMG header {raw[:newline]!r}")
    try:
        height, width = int(fields[1]), int(fields[2])
    except ValueError as exc:
        raise FormatError(f"bad CIMG dimensions {fields[1:]}") from exc
    return ComplexImage(from_payload(raw[newline + 1 :], height, width))


def write_cimg(path: PathLike, img: ComplexImage):
    """
    Writes an image to disk.

    Parameters
    ----------
    path : str or Path
        Destination file; parent directories are created.
    img : ComplexImage
        The image to write.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_cimg(img))


def read_cimg(path: PathLike) -> ComplexImage:
    """Reads an image from disk."""
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"{path} does not exist")
    return decode_cimg(path.read_bytes())


def write_pgm(path: PathLike, magnitude: np.ndarray, vmax: float):
    """
    Exports a magnitude image as a 16-bit binary PGM.

    Values are mapped linearly from ``[0, vmax]`` to ``[0, 65535]`` and
    clipped.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    magnitude = np.asarray(magnitude, dtype=np.float64)
    scale = 65535.0 / vmax if vmax > 0 else 0.0
    levels = np.clip(np.rint(magnitude * scale), 0, 65535).astype(">u2")
    height, width = levels.shape
    header = f"P5\n{width} {height}\n65535\n".encode("ascii")
    path.write_bytes(header + levels.tobytes())
