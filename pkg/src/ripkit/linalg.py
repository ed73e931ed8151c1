"""Dense symmetric linear algebra primitives.

`sym_eig` is a self-contained cyclic Jacobi eigensolver used to
re-verify reported witnesses through a second, independent route; the
bulk enumeration paths in `ripkit.rip` use batched LAPACK calls instead
and cross-check against this solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    NoConvergenceError,
    NonSymmetricError,
    OverlappingSupportsError,
    PreconditionError,
)

__all__ = [
    "SymmetricEigenResult",
    "sym_eig",
    "gram_submatrix",
    "cross_gram_spectral_norm",
    "truncate_top_k",
    "check_support",
    "batch_extreme_eigenvalues",
    "batch_spectral_norms",
]

SYMMETRY_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class SymmetricEigenResult:
    """Eigenvalues in ascending order; eigenvector columns match."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_square_symmetric(a, tol: float) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {m.shape}")
    skew = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if skew > tol * scale:
        raise NonSymmetricError(f"matrix deviates from symmetry by {skew:g}")
    return 0.5 * (m + m.T)


def sym_eig(a, tol: float = JACOBI_TOL) -> SymmetricEigenResult:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Sweeps zero out off-diagonal entries with Givens rotations until the
    off-diagonal Frobenius mass falls below `tol` relative to the whole
    matrix. Raises NonSymmetricError on asymmetric input and
    NoConvergenceError if the sweep cap is hit (does not happen for
    genuine symmetric input; the cap guards NaN-free termination).
    """
    m = _as_square_symmetric(a, SYMMETRY_TOL)
    d = m.shape[0]
    v = np.eye(d)
    if d == 1:
        return SymmetricEigenResult(m[0, 0:1].copy(), v)
    norm = float(np.linalg.norm(m))
    if norm == 0.0:
        return SymmetricEigenResult(np.zeros(d), v)
    def _off_diagonal_mass() -> float:
        return float(np.sqrt(np.sum(np.square(m - np.diag(np.diag(m))))))

    converged = False
    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_diagonal_mass() <= tol * norm:
            converged = True
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = m[p, q]
                if abs(apq) <= tol * norm / d:
                    continue
                # classic Jacobi rotation angle from the 2x2 block
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rot_p = c * m[:, p] - s * m[:, q]
                rot_q = s * m[:, p] + c * m[:, q]
                m[:, p], m[:, q] = rot_p, rot_q
                rot_p = c * m[p, :] - s * m[q, :]
                rot_q = s * m[p, :] + c * m[q, :]
                m[p, :], m[q, :] = rot_p, rot_q
                m[p, q] = m[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    if not converged and _off_diagonal_mass() > tol * norm:
        raise NoConvergenceError(
            f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )
    w = np.diag(m).copy()
    order = np.argsort(w, kind="stable")
    return SymmetricEigenResult(w[order], v[:, order])


def check_support(support: Sequence[int], p: int) -> tuple[int, ...]:
    """Normalize a support to a sorted tuple of distinct valid indices."""
    idx = tuple(int(i) for i in support)
    if len(idx) == 0:
        raise PreconditionError("support must be non-empty")
    if len(set(idx)) != len(idx):
        raise PreconditionError(f"support has repeated indices: {idx}")
    if min(idx) < 0 or max(idx) >= p:
        raise PreconditionError(f"support {idx} out of range for p={p}")
    return tuple(sorted(idx))


def gram_submatrix(phi, support: Sequence[int]) -> np.ndarray:
    """Gram matrix of the selected columns, Phi_T' Phi_T."""
    a = np.asarray(phi, dtype=np.float64)
    if a.ndim != 2:
        raise PreconditionError(f"expected a 2-D matrix, got shape {a.shape}")
    t = check_support(support, a.shape[1])
    cols = a[:, t]
    return cols.T @ cols


def cross_gram_spectral_norm(phi, support_a: Sequence[int], support_b: Sequence[int]) -> float:
    """Largest singular value of Phi_A' Phi_B for disjoint supports A, B.

    Computed as the square root of the top eigenvalue of the smaller of
    M M' and M' M, using the module's own Jacobi solver.
    """
    a = np.asarray(phi, dtype=np.float64)
    if a.ndim != 2:
        raise PreconditionError(f"expected a 2-D matrix, got shape {a.shape}")
    ta = check_support(support_a, a.shape[1])
    tb = check_support(support_b, a.shape[1])
    common = set(ta) & set(tb)
    if common:
        raise OverlappingSupportsError(f"supports share indices {sorted(common)}")
    m = a[:, ta].T @ a[:, tb]
    s = m @ m.T if m.shape[0] <= m.shape[1] else m.T @ m
    top = float(sym_eig(s).eigenvalues[-1])
    return float(np.sqrt(max(top, 0.0)))


def truncate_top_k(v, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a vector into its k largest-magnitude entries and the rest.

    Returns (kept, rest) with kept + rest == v. Ties in magnitude keep
    the lower index first, so the split is deterministic.
    """
    x = np.asarray(v, dtype=np.float64)
    if x.ndim != 1:
        raise PreconditionError(f"expected a vector, got shape {x.shape}")
    kk = int(k)
    if kk < 0 or kk > x.size:
        raise PreconditionError(f"k={kk} out of range for vector of length {x.size}")
    # stable sort on -|x| keeps earlier indices first among equal magnitudes
    order = np.argsort(-np.abs(x), kind="stable")
    kept = np.zeros_like(x)
    kept[order[:kk]] = x[order[:kk]]
    return kept, x - kept


def batch_extreme_eigenvalues(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(lambda_min, lambda_max) per symmetric block of a (N, k, k) stack."""
    w = np.linalg.eigvalsh(blocks)
    return w[:, 0], w[:, -1]


def batch_spectral_norms(blocks: np.ndarray) -> np.ndarray:
    """Largest singular value per block of a (N, k, k') stack.

    Uses eigenvalues of the smaller-side Gram so cost scales with
    min(k, k')^3 per block.
    """
    if blocks.shape[1] <= blocks.shape[2]:
        s = blocks @ np.swapaxes(blocks, 1, 2)
    else:
        s = np.swapaxes(blocks, 1, 2) @ blocks
    w = np.linalg.eigvalsh(s)
    return np.sqrt(np.maximum(w[:, -1], 0.0))
