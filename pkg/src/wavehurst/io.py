"""File formats: binary PGM images and plain CSV tables."""
from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .errors import InputError, InvalidShape
from .harness.features import SampleRecord

FLOAT_FMT = "%.17g"


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM with 8- or 16-bit samples."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        m = re.compile(rb"\s*(#[^\n]*\n\s*)*([^\s#]+)").match(data, pos)
        if m is None:
            raise InputError(f"{path}: truncated PGM header")
        tokens.append(m.group(2))
        pos = m.end()
    if tokens[0] != b"P5":
        raise InputError(f"{path}: only binary P5 PGM is supported")
    width, height, maxval = (int(t) for t in tokens[1:])
    pos += 1  # single whitespace byte after maxval
    if not 0 < maxval < 65536:
        raise InputError(f"{path}: bad maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    if raw.size != count:
        raise InputError(f"{path}: expected {count} samples")
    return raw.reshape(height, width).astype(float)


def write_pgm(path, image, bits: int = 16) -> None:
    """Write an image as binary PGM, linearly rescaled to the full range.

    The rescaling discards the original offset and scale.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise InvalidShape("PGM output needs a 2-D array")
    maxval = 65535 if bits == 16 else 255
    lo, hi = float(img.min()), float(img.max())
    scaled = np.zeros_like(img) if hi == lo else (img - lo) / (hi - lo)
    q = np.rint(scaled * maxval)
    dtype = ">u2" if bits == 16 else "u1"
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode()
    Path(path).write_bytes(header + q.astype(dtype).tobytes())


def read_matrix(path) -> np.ndarray:
    """Row-major CSV of reals; a single row or column is returned as 1-D."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    if 1 in arr.shape:
        return arr.ravel()
    return arr


def write_matrix(path, arr) -> None:
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    np.savetxt(path, arr, delimiter=",", fmt=FLOAT_FMT)


def read_image(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    return read_matrix(path)


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_rows(path_or_file, header, rows) -> None:
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


RECORD_COLUMNS = ("subject_id", "status", "patch", "hd", "hh", "hv")


def read_records(path) -> list[SampleRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RECORD_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        return [
            SampleRecord(
                row["subject_id"], row["status"].strip().lower(), int(row["patch"]),
                float(row["hd"]), float(row["hh"]), float(row["hv"]),
            )
            for row in reader
        ]


def write_records(path, records) -> None:
    write_rows(
        path,
        RECORD_COLUMNS,
        ((r.subject_id, r.status, r.patch_index, r.hd, r.hh, r.hv) for r in records),
    )
