"""Adversarial sensing-matrix family where k-sparse recovery must fail.

For every k >= 1 there is a (2k-1) x 2k matrix, built from the
equicorrelation Gram matrix with off-diagonal -1/(2k-1), whose
restricted isometry constant of order k equals (k-1)/(2k-1) < 1/2 while
two disjointly supported k-sparse vectors share the same image. The
family shows no condition of the form delta_k < c with c independent of
k can be relaxed past 1/2, and it exercises every non-identifiability
code path (l0 ties, l1 non-uniqueness flags).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, VerificationError
from .linalg import sym_eig
from .matrices import SensingMatrix
from .rip import delta_exact, _supports_array, _gather_gram_blocks

__all__ = [
    "CounterexampleInstance",
    "equicorrelation_gram",
    "sensing_matrix_from_gram",
    "null_split",
    "build_instance",
    "verify_instance",
    "VerificationReport",
    "closed_form_delta",
]

IMAGE_TOL = 1e-9
GRAM_TOL = 1e-10
SPECTRUM_TOL = 1e-10
NULL_ENTRY_TOL = 1e-12


def closed_form_delta(k: int) -> float:
    """delta_k of the order-k family: (k - 1) / (2k - 1)."""
    kk = int(k)
    if kk < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    return (kk - 1) / (2 * kk - 1)


def equicorrelation_gram(k: int) -> np.ndarray:
    """2k x 2k matrix with unit diagonal and off-diagonal -1/(2k-1).

    Positive semidefinite of rank 2k-1: eigenvalue 2k/(2k-1) with
    multiplicity 2k-1 and a single zero along the all-ones direction
    (every row sums to zero).
    """
    kk = int(k)
    if kk < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    d = 2 * kk
    off = -1.0 / (d - 1)
    g = np.full((d, d), off)
    np.fill_diagonal(g, 1.0)
    return g


def sensing_matrix_from_gram(k: int) -> SensingMatrix:
    """(2k-1) x 2k matrix whose Gram equals equicorrelation_gram(k).

    Factor the Gram as U diag(w) U' and keep the 2k-1 positive
    eigenpairs: rows are sqrt(w_i) times the corresponding eigenvector.
    """
    kk = int(k)
    gram = equicorrelation_gram(kk)
    eig = sym_eig(gram)
    # ascending order puts the single zero eigenvalue first
    w = eig.eigenvalues[1:]
    u = eig.eigenvectors[:, 1:]
    phi = (np.sqrt(np.maximum(w, 0.0))[:, None]) * u.T
    mat = SensingMatrix(phi)
    residual = float(np.linalg.norm(mat.gram() - gram))
    if residual > GRAM_TOL:
        raise VerificationError(
            f"gram_reconstruction: Frobenius residual {residual:g} exceeds {GRAM_TOL:g}"
        )
    return mat


def null_split(phi: SensingMatrix, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Split the normalized null direction of a family matrix into the
    two k-sparse halves with identical images.

    The Gram rows sum to zero, so the all-ones vector spans the null
    space; gamma is that direction scaled so ||beta_1||_2 = 1. beta_1
    keeps the first k coordinates of gamma and beta_2 negates the last
    k, so Phi beta_1 = Phi beta_2 because beta_1 - beta_2 = gamma.
    """
    kk = int(k)
    if kk < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    a = phi.array if isinstance(phi, SensingMatrix) else np.asarray(phi, dtype=np.float64)
    d = 2 * kk
    if a.shape != (d - 1, d):
        raise PreconditionError(
            f"expected a ({d - 1}, {d}) family matrix for k={kk}, got {a.shape}"
        )
    gamma = np.ones(d) / math.sqrt(kk)
    image = a @ gamma
    if float(np.linalg.norm(image)) > IMAGE_TOL:
        raise PreconditionError(
            "matrix is not from this family: all-ones direction is not in the null space"
        )
    if float(np.min(np.abs(gamma))) <= NULL_ENTRY_TOL:
        # cannot happen for the all-ones direction; guards the contract
        raise VerificationError("degenerate_null: null vector has a zero entry")
    beta1 = np.zeros(d)
    beta2 = np.zeros(d)
    beta1[:kk] = gamma[:kk]
    beta2[kk:] = -gamma[kk:]
    return beta1, beta2


@dataclass(frozen=True)
class CounterexampleInstance:
    """Order-k family member with its claimed constant and the two
    indistinguishable k-sparse signals."""

    k: int
    phi: SensingMatrix
    beta1: np.ndarray
    beta2: np.ndarray
    delta_claimed: float

    def __post_init__(self):
        kk = int(self.k)
        if kk < 1:
            raise PreconditionError(f"k must be >= 1, got {self.k}")
        d = 2 * kk
        if self.phi.array.shape != (d - 1, d):
            raise PreconditionError(
                f"phi must be ({d - 1}, {d}), got {self.phi.array.shape}"
            )
        b1 = np.asarray(self.beta1, dtype=np.float64)
        b2 = np.asarray(self.beta2, dtype=np.float64)
        if set(np.flatnonzero(b1).tolist()) != set(range(kk)):
            raise PreconditionError("beta1 must be supported exactly on the first k coordinates")
        if set(np.flatnonzero(b2).tolist()) != set(range(kk, d)):
            raise PreconditionError("beta2 must be supported exactly on the last k coordinates")
        if float(np.linalg.norm(self.phi.array @ (b1 - b2))) > IMAGE_TOL:
            raise PreconditionError("beta1 and beta2 must have identical images")
        if not np.any(b1 - b2):
            raise PreconditionError("beta1 - beta2 must be nonzero")


def build_instance(k: int) -> CounterexampleInstance:
    phi = sensing_matrix_from_gram(k)
    beta1, beta2 = null_split(phi, k)
    return CounterexampleInstance(
        k=int(k), phi=phi, beta1=beta1, beta2=beta2, delta_claimed=closed_form_delta(k)
    )


@dataclass(frozen=True)
class VerificationReport:
    k: int
    checks: tuple[tuple[str, bool, dict], ...] = field(default_factory=tuple)

    @property
    def all_ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "all_ok": self.all_ok,
            "checks": [
                {"claim": claim, "ok": ok, "detail": detail}
                for claim, ok, detail in self.checks
            ],
        }


def verify_instance(k: int, budget: int | None = None) -> VerificationReport:
    """Build the order-k instance and verify every claim about it.

    Checks, in order: the exhaustively computed delta_k matches the
    closed form to 1e-9; every size-k Gram block has spectrum
    {k/(2k-1)} + {2k/(2k-1) repeated k-1 times} to 1e-10; the two
    k-sparse signals have identical images; the l0 search finds at least
    two distinct k-sparse preimages. Raises VerificationError naming the
    first failed claim; the returned report carries the measured values.
    """
    from .solvers import l0_solutions

    kk = int(k)
    inst = build_instance(kk)
    checks: list[tuple[str, bool, dict]] = []

    value, witness = delta_exact(inst.phi, kk, budget=budget)
    expected = closed_form_delta(kk)
    ok = abs(value - expected) <= 1e-9
    checks.append(
        ("delta_matches_closed_form", ok,
         {"measured": value, "expected": expected, "witness": list(witness)})
    )

    d = 2 * kk
    expected_spectrum = np.concatenate(
        [[kk / (d - 1)], np.full(kk - 1, d / (d - 1))]
    )
    supports = _supports_array(d, kk)
    blocks = _gather_gram_blocks(inst.phi.gram(), supports, supports)
    spectra = np.linalg.eigvalsh(blocks)
    worst = float(np.max(np.abs(spectra - expected_spectrum[None, :])))
    checks.append(
        ("gram_block_spectra", worst <= SPECTRUM_TOL,
         {"max_abs_deviation": worst, "blocks": int(spectra.shape[0])})
    )

    image_gap = float(np.linalg.norm(inst.phi.array @ (inst.beta1 - inst.beta2)))
    checks.append(("images_coincide", image_gap <= IMAGE_TOL, {"image_gap": image_gap}))

    preimages = l0_solutions(inst.phi, inst.phi.array @ inst.beta1, kk, tol=1e-8, budget=budget)
    checks.append(
        ("non_identifiable", len(preimages) >= 2, {"distinct_preimages": len(preimages)})
    )

    report = VerificationReport(k=kk, checks=tuple(checks))
    for claim, ok, detail in checks:
        if not ok:
            raise VerificationError(f"{claim}: {detail}")
    return report
