"""The l2-vs-l1 norm gap inequality and its equality-attaining vectors.

For any nonzero x in R^n,

    0 <= ||x||_2 - ||x||_1 / sqrt(n) <= (sqrt(n) / 4) * (max_i |x_i| - min_i |x_i|)

with equality on the right exactly when all |x_i| coincide, or when n is
a multiple of 4 and x has n/4 entries of one common magnitude and zeros
elsewhere. The corollary form bounds ||x||_2 by ||x||_1 / sqrt(n) +
sqrt(n) * ||x||_inf / 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .linalg import check_support

__all__ = ["NormGapReport", "norm_gap", "extremal_vector", "corollary_bound"]

EQUALITY_RTOL = 1e-12


@dataclass(frozen=True)
class NormGapReport:
    n: int
    l2: float
    l1: float
    gap: float
    bound: float
    holds: bool
    equality: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "l2": self.l2,
            "l1": self.l1,
            "gap": self.gap,
            "bound": self.bound,
            "holds": self.holds,
            "equality": self.equality,
        }


def norm_gap(x, tol: float = 1e-12) -> NormGapReport:
    """Evaluate both sides of the norm-gap inequality for one vector.

    `holds` reports gap <= bound + tol (and gap >= -tol for the lower
    side); `equality` flags |gap - bound| within EQUALITY_RTOL relative
    tolerance.
    """
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise PreconditionError(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise PreconditionError("vector entries must be finite")
    n = v.size
    a = np.abs(v)
    l2 = float(np.linalg.norm(v))
    l1 = float(np.sum(a))
    gap = l2 - l1 / math.sqrt(n)
    bound = math.sqrt(n) / 4.0 * float(a.max() - a.min())
    scale = max(1.0, bound)
    holds = (gap >= -tol) and (gap <= bound + tol * scale)
    equality = abs(gap - bound) <= EQUALITY_RTOL * scale
    return NormGapReport(
        n=n, l2=l2, l1=l1, gap=float(gap), bound=float(bound),
        holds=bool(holds), equality=bool(equality),
    )


def extremal_vector(m: int, magnitude: float, positions: Sequence[int]) -> np.ndarray:
    """Vector in R^{4m} attaining the norm-gap bound with equality.

    Places `m` entries of the given positive magnitude at `positions`
    (distinct indices below 4m); all other entries are zero. For such a
    vector gap == bound == magnitude * sqrt(m) / 2.
    """
    mm = int(m)
    if mm < 1:
        raise PreconditionError(f"m must be positive, got {m}")
    mag = float(magnitude)
    if not (mag > 0.0) or not math.isfinite(mag):
        raise PreconditionError(f"magnitude must be positive and finite, got {magnitude}")
    idx = check_support(positions, 4 * mm)
    if len(idx) != mm:
        raise PreconditionError(f"need exactly m={mm} positions, got {len(idx)}")
    out = np.zeros(4 * mm)
    out[list(idx)] = mag
    return out


def corollary_bound(x) -> float:
    """Upper bound ||x||_1 / sqrt(n) + sqrt(n) * ||x||_inf / 4 on ||x||_2."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise PreconditionError(f"expected a non-empty vector, got shape {v.shape}")
    n = v.size
    a = np.abs(v)
    return float(np.sum(a) / math.sqrt(n) + math.sqrt(n) * a.max() / 4.0)
