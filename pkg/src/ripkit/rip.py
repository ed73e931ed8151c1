"""Exact restricted isometry and orthogonality constants by exhaustive
support enumeration, plus the audit of the inequality family relating
them.

delta(k) is the smallest constant with
    (1 - delta) ||c||^2 <= ||Phi_T c||^2 <= (1 + delta) ||c||^2
over all supports |T| = k; theta(k, k') is the smallest constant with
    |<Phi_T c, Phi_T' c'>| <= theta ||c|| ||c'||
over disjoint supports. Both are computed exactly (up to eigensolver
roundoff) by enumerating every support, and every reported extremizer is
re-verified through an independent eigensolver route.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BudgetExceededError,
    InvalidArityError,
    MissingProfileEntryError,
    PreconditionError,
    VerificationError,
)
from .linalg import (
    batch_extreme_eigenvalues,
    batch_spectral_norms,
    gram_submatrix,
    cross_gram_spectral_norm,
    sym_eig,
)
from .matrices import SensingMatrix, as_sensing_matrix, content_hash

__all__ = [
    "DEFAULT_BUDGET",
    "AUDIT_TOL",
    "delta_exact",
    "theta_exact",
    "RipProfile",
    "AuditEntry",
    "InequalityAuditReport",
    "audit_inequalities",
]

DEFAULT_BUDGET = 10**6
AUDIT_TOL = 1e-9
# relative disagreement allowed between the batched LAPACK route and the
# Jacobi re-verification of a witness
WITNESS_CHECK_TOL = 1e-8


def _check_budget(required: int, budget: int | None, what: str) -> None:
    cap = DEFAULT_BUDGET if budget is None else int(budget)
    if required > cap:
        raise BudgetExceededError(required, cap, what)


def _supports_array(p: int, k: int, universe: Sequence[int] | None = None) -> np.ndarray:
    pool = range(p) if universe is None else universe
    combos = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(pool, k)),
        dtype=np.intp,
    )
    return combos.reshape(-1, k)


def _gather_gram_blocks(g: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    return g[rows[:, :, None], cols[:, None, :]]


def delta_exact(phi, k: int, budget: int | None = None) -> tuple[float, tuple[int, ...]]:
    """Exact restricted isometry constant of order k, with a witness.

    Returns (value, support): the support attaining the extreme Gram
    eigenvalue deviation from 1. Enumeration covers exactly the
    supports of size k; smaller supports cannot attain more because
    their Gram spectra interlace those of any superset.
    """
    mat = as_sensing_matrix(phi)
    kk = int(k)
    if kk < 1 or kk > mat.p:
        raise InvalidArityError(f"k={kk} out of range for p={mat.p}")
    count = math.comb(mat.p, kk)
    _check_budget(count, budget, f"delta({kk})")
    g = mat.gram()
    supports = _supports_array(mat.p, kk)
    blocks = _gather_gram_blocks(g, supports, supports)
    lo, hi = batch_extreme_eigenvalues(blocks)
    deviations = np.maximum(hi - 1.0, 1.0 - lo)
    best = int(np.argmax(deviations))
    witness = tuple(int(i) for i in supports[best])
    value = float(deviations[best])
    _verify_delta_witness(mat, witness, value)
    return value, witness


def _verify_delta_witness(mat: SensingMatrix, witness: tuple[int, ...], value: float) -> None:
    w = sym_eig(gram_submatrix(mat.array, witness)).eigenvalues
    check = max(float(w[-1]) - 1.0, 1.0 - float(w[0]))
    if abs(check - value) > WITNESS_CHECK_TOL * max(1.0, abs(value)):
        raise VerificationError(
            f"delta witness re-verification mismatch: {check!r} vs {value!r}"
        )


def theta_exact(
    phi, k: int, k2: int, budget: int | None = None
) -> tuple[float, tuple[int, ...], tuple[int, ...]]:
    """Exact restricted orthogonality constant for disjoint supports of
    sizes (k, k2), with the witnessing pair.
    """
    mat = as_sensing_matrix(phi)
    ka, kb = int(k), int(k2)
    if ka < 1 or kb < 1:
        raise InvalidArityError(f"support sizes must be positive, got ({ka}, {kb})")
    if ka + kb > mat.p:
        raise InvalidArityError(f"k + k' = {ka + kb} exceeds p = {mat.p}")
    count = math.comb(mat.p, ka) * math.comb(mat.p - ka, kb)
    _check_budget(count, budget, f"theta({ka},{kb})")
    g = mat.gram()
    first = _supports_array(mat.p, ka)
    rows_parts = []
    cols_parts = []
    for row in first:
        complement = np.setdiff1d(np.arange(mat.p), row, assume_unique=False)
        seconds = _supports_array(len(complement), kb, universe=complement.tolist())
        if seconds.size == 0:
            continue
        rows_parts.append(np.broadcast_to(row, (seconds.shape[0], ka)))
        cols_parts.append(seconds)
    rows = np.concatenate(rows_parts, axis=0)
    cols = np.concatenate(cols_parts, axis=0)
    blocks = _gather_gram_blocks(g, rows, cols)
    sigmas = batch_spectral_norms(blocks)
    best = int(np.argmax(sigmas))
    wa = tuple(int(i) for i in rows[best])
    wb = tuple(int(i) for i in cols[best])
    value = float(sigmas[best])
    check = cross_gram_spectral_norm(mat.array, wa, wb)
    if abs(check - value) > WITNESS_CHECK_TOL * max(1.0, abs(value)):
        raise VerificationError(
            f"theta witness re-verification mismatch: {check!r} vs {value!r}"
        )
    return value, wa, wb


class RipProfile:
    """Memoized exact constants of one matrix, serializable to JSON.

    Built either around a matrix (constants computed on demand, keyed by
    the matrix content hash so mutation is detected) or from a JSON
    document alone, in which case only stored entries are available and
    anything else raises MissingProfileEntryError.
    """

    def __init__(self, matrix=None, *, budget: int | None = None):
        self._matrix = as_sensing_matrix(matrix) if matrix is not None else None
        self.budget = budget
        self._delta: dict[int, tuple[float, tuple[int, ...]]] = {}
        self._theta: dict[tuple[int, int], tuple[float, tuple[int, ...], tuple[int, ...]]] = {}
        if self._matrix is not None:
            self.matrix_id = self._matrix.matrix_id
            self.n, self.p = self._matrix.n, self._matrix.p
        else:
            self.matrix_id = ""
            self.n = self.p = 0

    def _check_identity(self) -> None:
        # recomputing the hash makes silent in-place mutation of the
        # underlying buffer invalidate (rather than poison) the memo
        if self._matrix is None:
            return
        current = content_hash(self._matrix.array)
        if current != self.matrix_id:
            self._delta.clear()
            self._theta.clear()
            self.matrix_id = current

    def delta(self, k: int) -> tuple[float, tuple[int, ...]]:
        self._check_identity()
        kk = int(k)
        if kk in self._delta:
            return self._delta[kk]
        if self._matrix is None:
            raise MissingProfileEntryError(f"profile has no delta({kk}) and no matrix")
        result = delta_exact(self._matrix, kk, budget=self.budget)
        return self._delta.setdefault(kk, result)

    def theta(self, k: int, k2: int) -> tuple[float, tuple[int, ...], tuple[int, ...]]:
        self._check_identity()
        ka, kb = int(k), int(k2)
        key = (min(ka, kb), max(ka, kb))
        if key in self._theta:
            value, wa, wb = self._theta[key]
        else:
            if self._matrix is None:
                raise MissingProfileEntryError(
                    f"profile has no theta({ka},{kb}) and no matrix"
                )
            value, wa, wb = theta_exact(self._matrix, key[0], key[1], budget=self.budget)
            self._theta.setdefault(key, (value, wa, wb))
        if (ka, kb) == key:
            return value, wa, wb
        return value, wb, wa

    def delta_entries(self) -> dict[int, tuple[float, tuple[int, ...]]]:
        return dict(self._delta)

    def theta_entries(self):
        return dict(self._theta)

    def to_json(self, indent: int | None = None) -> str:
        doc = {
            "matrix_id": self.matrix_id,
            "n": self.n,
            "p": self.p,
            "delta": [
                {"k": k, "value": v, "witness": list(w)}
                for k, (v, w) in sorted(self._delta.items())
            ],
            "theta": [
                {
                    "k": key[0],
                    "k2": key[1],
                    "value": v,
                    "witnessA": list(wa),
                    "witnessB": list(wb),
                }
                for key, (v, wa, wb) in sorted(self._theta.items())
            ],
        }
        return json.dumps(doc, indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RipProfile":
        doc = json.loads(text)
        prof = cls()
        prof.matrix_id = str(doc.get("matrix_id", ""))
        prof.n = int(doc.get("n", 0))
        prof.p = int(doc.get("p", 0))
        for entry in doc.get("delta", []):
            prof._delta[int(entry["k"])] = (
                float(entry["value"]),
                tuple(int(i) for i in entry["witness"]),
            )
        for entry in doc.get("theta", []):
            ka, kb = int(entry["k"]), int(entry["k2"])
            key = (min(ka, kb), max(ka, kb))
            wa = tuple(int(i) for i in entry["witnessA"])
            wb = tuple(int(i) for i in entry["witnessB"])
            if (ka, kb) != key:
                wa, wb = wb, wa
            prof._theta[key] = (float(entry["value"]), wa, wb)
        return prof


@dataclass(frozen=True)
class AuditEntry:
    """One audited inequality instance: holds iff slack = rhs - lhs >= -tol."""

    inequality_id: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    inputs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class InequalityAuditReport:
    matrix_id: str
    k_max: int
    tol: float
    entries: tuple[AuditEntry, ...]

    @property
    def all_hold(self) -> bool:
        return all(e.holds for e in self.entries)

    @property
    def violations(self) -> tuple[AuditEntry, ...]:
        return tuple(e for e in self.entries if not e.holds)

    def to_csv(self) -> str:
        lines = ["inequality_id,lhs,rhs,slack,holds"]
        for e in self.entries:
            lines.append(f"{e.inequality_id},{e.lhs!r},{e.rhs!r},{e.slack!r},{e.holds}")
        return "\n".join(lines) + "\n"


def _partitions_at_least_two_parts(total: int, max_part: int) -> Iterable[tuple[int, ...]]:
    """Non-increasing partitions of `total` into >= 2 positive parts."""

    def rec(remaining: int, cap: int, prefix: tuple[int, ...]):
        if remaining == 0:
            if len(prefix) >= 2:
                yield prefix
            return
        for part in range(min(cap, remaining), 0, -1):
            yield from rec(remaining - part, part, prefix + (part,))

    yield from rec(total, max_part, ())


def audit_inequalities(
    profile_or_matrix,
    k_max: int,
    tol: float = AUDIT_TOL,
    budget: int | None = None,
) -> InequalityAuditReport:
    """Audit every inequality in the family on one matrix, instantiating
    each at all index combinations with total sparsity <= k_max (capped
    by p). Violations beyond `tol` mean an implementation bug, not a
    property of the matrix: every inequality is a theorem.
    """
    if isinstance(profile_or_matrix, RipProfile):
        prof = profile_or_matrix
    else:
        prof = RipProfile(profile_or_matrix, budget=budget)
    cap = min(int(k_max), prof.p)
    if cap < 1:
        raise PreconditionError(f"k_max={k_max} leaves nothing to audit for p={prof.p}")

    def d(k: int) -> float:
        return prof.delta(k)[0]

    def th(a: int, b: int) -> float:
        return prof.theta(a, b)[0]

    entries: list[AuditEntry] = []

    def add(inequality_id: str, lhs: float, rhs: float, **inputs) -> None:
        slack = rhs - lhs
        entries.append(
            AuditEntry(
                inequality_id=inequality_id,
                lhs=float(lhs),
                rhs=float(rhs),
                slack=float(slack),
                holds=bool(slack >= -tol),
                inputs=inputs,
            )
        )

    # monotonicity in the order
    for k in range(1, cap):
        add("delta_monotone", d(k), d(k + 1), k=k, k1=k + 1)
    theta_pairs = [(a, b) for a in range(1, cap) for b in range(a, cap - a + 1)]
    for a, b in theta_pairs:
        if a + b + 1 <= cap:
            add("theta_monotone_second", th(a, b), th(a, b + 1), k=a, k2=b, k2_up=b + 1)
            add("theta_monotone_first", th(a, b), th(a + 1, b), k=a, k_up=a + 1, k2=b)

    # two-sided sandwich between theta and delta of combined order
    for a, b in theta_pairs:
        s = a + b
        add("sandwich_lower", th(a, b), d(s), k=a, k2=b)
        add(
            "sandwich_upper",
            d(s),
            th(a, b) + max(d(a), d(b)),
            k=a,
            k2=b,
        )
        add(
            "weighted_upper",
            d(s),
            th(a, b) + (a * d(a) + b * d(b)) / s,
            k=a,
            k2=b,
        )
        add(
            "balanced_upper",
            d(s),
            (2.0 * math.sqrt(a * b) / s) * th(a, b) + max(d(a), d(b)),
            k=a,
            k2=b,
        )

    # splitting the second support into pieces: root-sum-square bound
    for a in range(1, cap - 1):
        for total in range(2, cap - a + 1):
            for parts in _partitions_at_least_two_parts(total, total - 1):
                rss = math.sqrt(sum(th(a, piece) ** 2 for piece in parts))
                add(
                    "root_sum_square",
                    th(a, total),
                    rss,
                    k=a,
                    k2=total,
                    parts=list(parts),
                )

    # growing the second support by a rational factor >= 1
    for a in range(1, cap - 1):
        for small in range(1, cap - a + 1):
            for big in range(small + 1, cap - a + 1):
                factor = math.sqrt(big / small)
                add(
                    "sqrt_lifting",
                    th(a, big),
                    factor * th(a, small),
                    k=a,
                    k2=small,
                    k2_lifted=big,
                )

    # order-quadrupling and order-tripling corollaries
    for k in range(1, cap // 4 + 1):
        add("quadruple_order", d(4 * k), 3.0 * d(2 * k), k=k)
    for k in range(1, cap // 3 + 1):
        add(
            "triple_order",
            d(3 * k),
            d(k) / 3.0 + (math.sqrt(2.0) + 2.0 / 3.0) * d(2 * k),
            k=k,
        )

    return InequalityAuditReport(
        matrix_id=prof.matrix_id, k_max=cap, tol=tol, entries=tuple(entries)
    )
