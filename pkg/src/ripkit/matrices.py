"""Sensing-matrix wrapper plus the shared on-disk CSV format.

The CSV layout is the interchange format used by the CLI and the
experiment harness: first line ``rows,cols``, then one line per row with
comma-separated entries written so they round-trip to the exact float64
bit pattern.
"""

from __future__ import annotations

import hashlib
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError

__all__ = [
    "SensingMatrix",
    "as_sensing_matrix",
    "content_hash",
    "read_matrix_csv",
    "write_matrix_csv",
    "matrix_to_csv_text",
    "matrix_from_csv_text",
]


def _validated_array(array) -> np.ndarray:
    a = np.asarray(array, dtype=np.float64)
    if a.ndim != 2:
        raise PreconditionError(f"sensing matrix must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise PreconditionError(f"sensing matrix must be non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise PreconditionError("sensing matrix entries must be finite")
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    a.setflags(write=False)
    return a


def content_hash(array: np.ndarray) -> str:
    """SHA-256 over the shape and raw float64 bytes (C order)."""
    a = np.ascontiguousarray(array, dtype=np.float64)
    h = hashlib.sha256()
    h.update(f"{a.shape[0]},{a.shape[1]};".encode())
    h.update(a.tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class SensingMatrix:
    """Immutable float64 matrix with a content-derived identity.

    `matrix_id` is the SHA-256 of the dimensions and entry bytes, so two
    matrices compare equal exactly when every entry matches bit for bit.
    """

    array: np.ndarray
    matrix_id: str = field(init=False)

    def __post_init__(self):
        a = _validated_array(self.array)
        object.__setattr__(self, "array", a)
        object.__setattr__(self, "matrix_id", content_hash(a))

    @property
    def n(self) -> int:
        return self.array.shape[0]

    @property
    def p(self) -> int:
        return self.array.shape[1]

    @property
    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.array, axis=0)

    def gram(self) -> np.ndarray:
        return self.array.T @ self.array


def as_sensing_matrix(obj) -> SensingMatrix:
    if isinstance(obj, SensingMatrix):
        return obj
    return SensingMatrix(obj)


def _format_entry(x: float) -> str:
    # repr of a Python float is the shortest string that parses back to
    # the identical bit pattern, which meets the >= 17 significant digit
    # round-trip requirement of the format.
    return repr(float(x))


def matrix_to_csv_text(array) -> str:
    a = np.asarray(array, dtype=np.float64)
    if a.ndim != 2:
        raise PreconditionError(f"expected a 2-D array, got shape {a.shape}")
    out = io.StringIO()
    out.write(f"{a.shape[0]},{a.shape[1]}\n")
    for row in a:
        out.write(",".join(_format_entry(x) for x in row))
        out.write("\n")
    return out.getvalue()


def matrix_from_csv_text(text: str) -> np.ndarray:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise PreconditionError("empty matrix CSV")
    header = lines[0].split(",")
    if len(header) != 2:
        raise PreconditionError(f"matrix CSV header must be 'rows,cols', got {lines[0]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise PreconditionError(f"bad matrix CSV header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != rows:
        raise PreconditionError(f"matrix CSV declares {rows} rows but has {len(body)}")
    data = np.empty((rows, cols), dtype=np.float64)
    for i, line in enumerate(body):
        parts = line.split(",")
        if len(parts) != cols:
            raise PreconditionError(
                f"matrix CSV row {i} has {len(parts)} entries, expected {cols}"
            )
        data[i] = [float(x) for x in parts]
    if not np.all(np.isfinite(data)):
        raise PreconditionError("matrix CSV contains non-finite entries")
    return data


def write_matrix_csv(path: str | os.PathLike, array) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(matrix_to_csv_text(array))


def read_matrix_csv(path: str | os.PathLike) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        return matrix_from_csv_text(fh.read())
