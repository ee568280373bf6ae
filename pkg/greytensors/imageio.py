"""Reading and writing grey images.

Two formats: binary 16-bit PGM (P5, big-endian samples, v stored as rint(v * 65535)) for
d=2 images, and a raw little-endian float32 raster with a text sidecar header for any d.
PGM files written here carry the lattice and window in a "# greytensors {json}" comment.
"""

import json
import os
import re
from typing import Any

import numpy as np

from .digitizer import GreyImage, Lattice
from .exceptions import ImageFormatException, ImageValueException, LatticeException

PGM_MAXVAL = 65535
PGM_COMMENT_TAG = b"# greytensors "
PGM_HEADER = re.compile(
    rb"(^P5\s(?:\s*#.*[\r\n])*"
    rb"(\d+)\s(?:\s*#.*[\r\n])*"
    rb"(\d+)\s(?:\s*#.*[\r\n])*"
    rb"(\d+)\s)"
)
RAW_SUFFIXES = (".raw", ".f32")
HEADER_SUFFIX = ".hdr"


def _check_values(values: np.ndarray) -> None:
    if np.any(~np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
        raise ImageValueException("grey values must lie in [0, 1] to be written")


def _record(image: GreyImage) -> dict[str, Any]:
    return {
        "lattice": image.lattice.to_record(),
        "window": [list(r) for r in image.window],
        "metadata": image.metadata,
    }


def _lattice_from_record(record: dict[str, Any]) -> Lattice:
    try:
        return Lattice(record["basis"], float(record["a"]), record["c"])
    except LatticeException as e:
        raise ImageFormatException(f"invalid lattice in image header: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise ImageFormatException(f"incomplete lattice in image header: {e}") from e


def encode_pgm(values: np.ndarray, record: dict[str, Any] | None = None) -> bytes:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ImageFormatException(f"PGM stores two-dimensional images, got {values.ndim} axes")
    _check_values(values)

    height, width = values.shape
    header = b"P5\n"
    if record is not None:
        header += PGM_COMMENT_TAG + json.dumps(record, sort_keys=True).encode("utf-8") + b"\n"
    header += f"{width} {height}\n{PGM_MAXVAL}\n".encode("ascii")
    samples = np.rint(values * PGM_MAXVAL).astype(">u2")
    return header + samples.tobytes()


def decode_pgm(buffer: bytes) -> tuple[np.ndarray, dict[str, Any] | None]:
    match = PGM_HEADER.search(buffer)
    if match is None:
        raise ImageFormatException("not a binary PGM file")
    header, width, height, maxval = match.groups()
    width, height, maxval = int(width), int(height), int(maxval)
    if not 0 < maxval <= PGM_MAXVAL:
        raise ImageFormatException(f"PGM maxval {maxval} is outside 1..{PGM_MAXVAL}")

    dtype = "u1" if maxval < 256 else ">u2"
    expected = width * height * np.dtype(dtype).itemsize
    if len(buffer) - len(header) < expected:
        raise ImageFormatException(f"PGM data is truncated, expected {expected} bytes")
    samples = np.frombuffer(buffer, dtype=dtype, count=width * height, offset=len(header))

    record = None
    for line in header.splitlines():
        if line.startswith(PGM_COMMENT_TAG):
            try:
                record = json.loads(line[len(PGM_COMMENT_TAG) :])
            except json.JSONDecodeError as e:
                raise ImageFormatException(f"malformed greytensors comment: {e}") from e

    return samples.reshape(height, width).astype(np.float64) / maxval, record


def write_pgm(image: GreyImage, file_path: str) -> None:
    with open(file_path, "wb") as f:
        f.write(encode_pgm(image.values, _record(image)))


def read_pgm(file_path: str) -> GreyImage:
    with open(file_path, "rb") as f:
        values, record = decode_pgm(f.read())

    if record is None:
        # a plain PGM is read on the unit lattice with its origin at the first sample
        window = ((0, values.shape[0]), (0, values.shape[1]))
        return GreyImage(Lattice.standard(2, 1.0), window, values)

    lattice = _lattice_from_record(record.get("lattice", {}))
    window = tuple(tuple(r) for r in record.get("window", ()))
    return GreyImage(lattice, window, values, record.get("metadata"))


def _header_path(file_path: str) -> str:
    return os.path.splitext(file_path)[0] + HEADER_SUFFIX


def encode_header(image: GreyImage) -> str:
    lattice = image.lattice
    lines = [
        f"dim {lattice.dim}",
        "window " + " ".join(f"{lo} {hi}" for lo, hi in image.window),
        f"a {lattice.a!r}",
        "basis " + " ".join(repr(float(v)) for v in lattice.basis.reshape(-1)),
        "c " + " ".join(repr(float(v)) for v in lattice.c),
        "metadata " + json.dumps(image.metadata, sort_keys=True),
    ]
    return "\n".join(lines) + "\n"


def decode_header(text: str) -> tuple[Lattice, tuple[tuple[int, int], ...], dict[str, Any]]:
    fields: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.strip().partition(" ")
        fields[key] = value

    try:
        dim = int(fields["dim"])
        bounds = [int(v) for v in fields["window"].split()]
        a = float(fields["a"])
        basis = np.array([float(v) for v in fields["basis"].split()]).reshape(dim, dim)
        c = [float(v) for v in fields["c"].split()]
        metadata = json.loads(fields.get("metadata", "{}"))
    except (KeyError, ValueError, json.JSONDecodeError) as e:
        raise ImageFormatException(f"malformed raster header: {e}") from e
    if len(bounds) != 2 * dim:
        raise ImageFormatException(f"window has {len(bounds)} bounds for dimension {dim}")

    window = tuple((bounds[2 * i], bounds[2 * i + 1]) for i in range(dim))
    lattice = _lattice_from_record({"basis": basis.tolist(), "a": a, "c": c})
    return lattice, window, metadata


def write_raw(image: GreyImage, file_path: str) -> None:
    _check_values(image.values)
    with open(file_path, "wb") as f:
        f.write(image.values.astype("<f4").tobytes())
    with open(_header_path(file_path), "w") as f:
        f.write(encode_header(image))


def read_raw(file_path: str) -> GreyImage:
    try:
        with open(_header_path(file_path), "r") as f:
            lattice, window, metadata = decode_header(f.read())
    except FileNotFoundError as e:
        raise ImageFormatException(f"raster header {_header_path(file_path)} is missing") from e

    shape = tuple(hi - lo for lo, hi in window)
    with open(file_path, "rb") as f:
        buffer = f.read()
    if len(buffer) != 4 * int(np.prod(shape)):
        raise ImageFormatException(f"raster holds {len(buffer)} bytes, window {window} needs more")
    values = np.frombuffer(buffer, dtype="<f4").reshape(shape).astype(np.float64)
    return GreyImage(lattice, window, values, metadata)


def write_image(image: GreyImage, file_path: str) -> None:
    suffix = os.path.splitext(file_path)[1].lower()
    if suffix == ".pgm":
        write_pgm(image, file_path)
    elif suffix in RAW_SUFFIXES:
        write_raw(image, file_path)
    else:
        raise ImageFormatException(f"unknown image format '{suffix}'")


def read_image(file_path: str) -> GreyImage:
    suffix = os.path.splitext(file_path)[1].lower()
    if suffix == ".pgm":
        return read_pgm(file_path)
    if suffix in RAW_SUFFIXES:
        return read_raw(file_path)
    raise ImageFormatException(f"unknown image format '{suffix}'")
