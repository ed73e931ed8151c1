"""Seeded random sensing matrices and sparse test signals.

Entry layout is fixed by contract: matrix entries are drawn row-major
from the seed's counter stream, signal supports are drawn before signal
values, so every artifact is reproducible bit-for-bit from its spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .matrices import SensingMatrix
from .rng import CounterRng

__all__ = ["EnsembleSpec", "generate_matrix", "generate_sparse_signal"]

MATRIX_KINDS = ("gaussian", "bernoulli")
NORMALIZATIONS = ("unit_l2", "inv_sqrt_n")
SIGNAL_LAWS = ("rademacher", "gaussian", "flat")


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int
    p: int
    column_normalization: str = "unit_l2"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MATRIX_KINDS:
            raise PreconditionError(
                f"kind must be one of {MATRIX_KINDS}, got {self.kind!r}"
            )
        if self.column_normalization not in NORMALIZATIONS:
            raise PreconditionError(
                f"column_normalization must be one of {NORMALIZATIONS}, "
                f"got {self.column_normalization!r}"
            )
        if int(self.n) < 1 or int(self.p) < 1:
            raise PreconditionError(f"need n, p >= 1, got n={self.n}, p={self.p}")


def generate_matrix(spec: EnsembleSpec) -> SensingMatrix:
    """Matrix described by `spec`, bit-exact per seed.

    Gaussian: i.i.d. standard normal entries, then either each column
    scaled to unit l2 norm or every entry scaled by 1/sqrt(n).
    Bernoulli: entries +-1/sqrt(n) (unit columns either way).
    """
    rng = CounterRng(spec.seed)
    n, p = int(spec.n), int(spec.p)
    if spec.kind == "gaussian":
        entries = rng.normal(n * p).reshape(n, p)
        if spec.column_normalization == "unit_l2":
            norms = np.linalg.norm(entries, axis=0)
            if float(norms.min()) <= 0.0:
                # a zero column has probability zero; regenerate defensively
                raise PreconditionError("degenerate zero column in Gaussian draw")
            entries = entries / norms
        else:
            entries = entries / math.sqrt(n)
    else:
        entries = rng.rademacher(n * p).reshape(n, p) / math.sqrt(n)
    return SensingMatrix(entries)


def generate_sparse_signal(p: int, k: int, magnitude_law: str, seed: int) -> np.ndarray:
    """Exactly k-sparse vector on a uniform random support.

    The support is drawn first, then the k nonzero values in support
    order: rademacher (+-1), gaussian (standard normal), or flat (all
    ones).
    """
    pp, kk = int(p), int(k)
    if not (1 <= kk <= pp):
        raise PreconditionError(f"need 1 <= k <= p, got k={k}, p={p}")
    if magnitude_law not in SIGNAL_LAWS:
        raise PreconditionError(
            f"magnitude_law must be one of {SIGNAL_LAWS}, got {magnitude_law!r}"
        )
    rng = CounterRng(seed)
    support = rng.subset(pp, kk)
    out = np.zeros(pp)
    if magnitude_law == "rademacher":
        values = rng.rademacher(kk)
    elif magnitude_law == "gaussian":
        values = rng.normal(kk)
        # a zero draw would break the exact-sparsity contract
        values[values == 0.0] = 1.0
    else:
        values = np.ones(kk)
    out[list(support)] = values
    return out
