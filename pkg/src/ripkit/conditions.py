"""Sufficient-condition checkers and error-bound calculators for sparse
recovery, with exact rational-surd arithmetic where floats cannot honor
the advertised identities.

Two families of conditions are covered:

* a mixed condition delta_{k1} + t * theta_{k1,k2} < 1, where the factor
  t depends only on the integer triple (k, k1, k2);
* a single-constant threshold delta_k < 0.307 (for k > 1), together with
  the noise amplification coefficients it implies.

Values such as t(k, k, k) = 5/4 are exact rational statements, so
`t_factor_exact` returns t as coeff * sqrt(radicand) with an exact
Fraction coefficient and squarefree radicand. The float paths are thin
wrappers over the exact ones where cheap, and direct float formulas on
the large-k ranges where factoring would dominate runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import PreconditionError

__all__ = [
    "DELTA_THRESHOLD",
    "REFINED_BOUND_CONSTANT",
    "Surd",
    "t_factor_exact",
    "t_factor",
    "AmplificationResult",
    "amplification_factor",
    "amplification_factor_exact",
    "ConditionReport",
    "check_delta_theta_condition",
    "check_delta_threshold",
    "general_signal_bound",
    "dantzig_error_bound",
]

DELTA_THRESHOLD = 0.307
# supremum of the amplification factor over k >= 2; equals the k -> 4/9*k
# limit of the underlying function and exceeds every finite-k value
REFINED_BOUND_CONSTANT = 1.0 + 23.0 / (2.0 * math.sqrt(26.0))


def _split_square(n: int) -> tuple[int, int]:
    """n = s*s * r with r squarefree; returns (s, r). Trial division."""
    if n < 1:
        raise PreconditionError(f"need a positive integer, got {n}")
    s, r = 1, n
    d = 2
    while d * d <= r:
        dd = d * d
        while r % dd == 0:
            r //= dd
            s *= d
        d += 1
    return s, r


@dataclass(frozen=True)
class Surd:
    """Exact nonnegative quadratic surd coeff * sqrt(radicand)."""

    coeff: Fraction
    radicand: int

    def __post_init__(self):
        if self.radicand < 1:
            raise PreconditionError(f"radicand must be >= 1, got {self.radicand}")

    @classmethod
    def sqrt_ratio(cls, num: int, den: int) -> "Surd":
        """Exact sqrt(num/den) for positive integers."""
        if num < 1 or den < 1:
            raise PreconditionError(f"need positive integers, got {num}/{den}")
        s, r = _split_square(num * den)
        return cls(Fraction(s, den), r).normalized()

    def normalized(self) -> "Surd":
        s, r = _split_square(self.radicand)
        return Surd(self.coeff * s, r)

    def __mul__(self, other):
        if isinstance(other, Surd):
            s, r = _split_square(self.radicand * other.radicand)
            return Surd(self.coeff * other.coeff * s, r)
        return Surd(self.coeff * Fraction(other), self.radicand)

    __rmul__ = __mul__

    def __add__(self, other: "Surd") -> "Surd":
        # only like radicands stay exact; that is the only case needed here
        if self.radicand != other.radicand:
            if self.coeff == 0:
                return other
            if other.coeff == 0:
                return self
            raise PreconditionError(
                f"cannot add surds with radicands {self.radicand} and {other.radicand}"
            )
        return Surd(self.coeff + other.coeff, self.radicand)

    @property
    def is_rational(self) -> bool:
        return self.radicand == 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise PreconditionError(f"sqrt({self.radicand}) is irrational")
        return self.coeff

    def squared(self) -> Fraction:
        return self.coeff * self.coeff * self.radicand

    def __float__(self) -> float:
        if self.radicand == 1:
            return float(self.coeff)
        return float(self.coeff) * math.sqrt(self.radicand)


def _check_t_preconditions(k: int, k1: int, k2: int) -> tuple[int, int, int]:
    kk, ka, kb = int(k), int(k1), int(k2)
    problems = []
    if not (1 <= kk <= ka):
        problems.append(f"need k1 >= k >= 1, got k={kk}, k1={ka}")
    if kb < 1:
        problems.append(f"need k2 >= 1, got k2={kb}")
    if 8 * (ka - kk) > kb:
        problems.append(f"need 8*(k1 - k) <= k2, got 8*{ka - kk} > {kb}")
    if problems:
        raise PreconditionError("; ".join(problems))
    return kk, ka, kb


def t_factor_exact(k: int, k1: int, k2: int) -> Surd:
    """Exact mixing factor

        t = sqrt(k1/k2) + sqrt(k2/k1)/4 - 2*(k1 - k)/sqrt(k1*k2)
          = (4*k1 + k2 - 8*(k1 - k)) / (4*sqrt(k1*k2))

    as a rational-coefficient surd. Preconditions: k1 >= k >= 1,
    k2 >= 1, 8*(k1 - k) <= k2 (keeps t positive and the derivation valid).
    """
    kk, ka, kb = _check_t_preconditions(k, k1, k2)
    num = 4 * ka + kb - 8 * (ka - kk)
    return (Fraction(num, 4) * Surd.sqrt_ratio(1, ka * kb)).normalized()


def t_factor(k: int, k1: int, k2: int) -> float:
    """Float mixing factor; see t_factor_exact for the formula."""
    kk, ka, kb = _check_t_preconditions(k, k1, k2)
    return (
        math.sqrt(ka / kb)
        + 0.25 * math.sqrt(kb / ka)
        - 2.0 * (ka - kk) / math.sqrt(ka * kb)
    )


def _second_order_size(k: int) -> int:
    """Rounding of 4k/9 used by the amplification construction: round
    half toward floor on the residue scale (floor when 4k mod 9 <= 4)."""
    residue = (4 * k) % 9
    if residue <= 4:
        return (4 * k) // 9
    return -((-4 * k) // 9)


@dataclass(frozen=True)
class AmplificationResult:
    """Constant A_k with delta_{2k} <= A_k * theta_{k,k} for k >= 2.

    `k2` is the second support size the construction picks, `t` the
    mixing factor at (k, k, k2), and value = 1 + t * sqrt(k / (k - k2)).
    """

    k: int
    k2: int
    t: float
    value: float


def amplification_factor(k: int) -> AmplificationResult:
    kk = int(k)
    if kk < 2:
        raise PreconditionError(f"amplification factor needs k >= 2, got {k}")
    k2 = _second_order_size(kk)
    if k2 == 1:
        # degenerate second order: the k2 = 1 branch collapses to t = sqrt(k)
        t = math.sqrt(kk)
    else:
        t = math.sqrt(kk / k2) + 0.25 * math.sqrt(k2 / kk)
    value = 1.0 + t * math.sqrt(kk / (kk - k2))
    return AmplificationResult(k=kk, k2=k2, t=t, value=value)


def amplification_factor_exact(k: int) -> tuple[AmplificationResult, Surd]:
    """Amplification constant with the exact surd for value - 1.

    Exact arithmetic costs integer factorizations, so use this for
    small k (tables, spot checks); the float path covers large ranges.
    """
    kk = int(k)
    if kk < 2:
        raise PreconditionError(f"amplification factor needs k >= 2, got {k}")
    k2 = _second_order_size(kk)
    if k2 == 1:
        t_exact = Surd.sqrt_ratio(kk, 1)
    else:
        t_exact = Surd.sqrt_ratio(kk, k2) + Fraction(1, 4) * Surd.sqrt_ratio(k2, kk)
    excess = t_exact * Surd.sqrt_ratio(kk, kk - k2)
    value = 1.0 + float(excess)
    t = float(t_exact)
    return AmplificationResult(k=kk, k2=k2, t=t, value=value), excess


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one sufficient-condition check.

    `holds` means the strict inequality lhs < threshold succeeded; the
    error coefficients are only meaningful in that case and are None
    otherwise. `details` carries per-condition extras (bounds already
    multiplied out, refined variants, the inputs used).
    """

    condition_id: str
    lhs: float
    threshold: float
    holds: bool
    error_bound_coefficient: float | None
    inputs: dict
    details: dict

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "lhs": self.lhs,
            "threshold": self.threshold,
            "holds": self.holds,
            "error_bound_coefficient": self.error_bound_coefficient,
            "inputs": self.inputs,
            "details": self.details,
        }


def check_delta_theta_condition(profile, k: int, k1: int, k2: int) -> ConditionReport:
    """Check delta_{k1} + t * theta_{k1,k2} < 1 and derive the noise
    amplification coefficient 2*sqrt(2)*sqrt(1 + delta_{k1}) / (1 - lhs).

    `profile` must supply delta(k1) and theta(k1, k2) (a RipProfile or
    anything with those two methods). When the condition holds, any
    minimizer of the l1 program with an l2 feasibility radius eps around
    the measurements of a k-sparse signal lies within coefficient * eps
    of that signal.
    """
    d1 = float(profile.delta(k1)[0])
    th = float(profile.theta(k1, k2)[0])
    if not (0.0 <= d1 <= 1.0):
        raise PreconditionError(f"delta must lie in [0, 1], got {d1}")
    if th < 0.0:
        raise PreconditionError(f"theta must be nonnegative, got {th}")
    t = t_factor(k, k1, k2)
    lhs = d1 + t * th
    holds = lhs < 1.0
    coeff = None
    if holds:
        coeff = 2.0 * math.sqrt(2.0) * math.sqrt(1.0 + d1) / (1.0 - lhs)
    return ConditionReport(
        condition_id="delta_plus_t_theta_below_one",
        lhs=float(lhs),
        threshold=1.0,
        holds=bool(holds),
        error_bound_coefficient=coeff,
        inputs={"k": int(k), "k1": int(k1), "k2": int(k2),
                "delta_k1": d1, "theta_k1_k2": th, "t": t},
        details={},
    )


def check_delta_threshold(delta_k: float, k: int, epsilon: float = 0.0) -> ConditionReport:
    """Check delta_k < 0.307 for k > 1 and derive the resulting bounds.

    The plain coefficient is 1 / (0.307 - delta_k), giving the l2 error
    bound eps / (0.307 - delta_k); the refined variant replaces the
    constant with 2*sqrt(2)*sqrt(1 + delta_k) / (1 - C0 * delta_k),
    C0 = REFINED_BOUND_CONSTANT, valid on the same threshold.
    """
    d = float(delta_k)
    kk = int(k)
    eps = float(epsilon)
    if kk <= 1:
        raise PreconditionError(f"threshold condition needs k > 1, got k={kk}")
    if not (0.0 <= d <= 1.0):
        raise PreconditionError(f"delta must lie in [0, 1], got {d}")
    if eps < 0.0:
        raise PreconditionError(f"epsilon must be nonnegative, got {eps}")
    holds = d < DELTA_THRESHOLD
    coeff = None
    details: dict = {"refined_constant": REFINED_BOUND_CONSTANT}
    if holds:
        coeff = 1.0 / (DELTA_THRESHOLD - d)
        details["bound"] = eps * coeff
        denom = 1.0 - REFINED_BOUND_CONSTANT * d
        if denom > 0.0:
            refined_coeff = 2.0 * math.sqrt(2.0) * math.sqrt(1.0 + d) / denom
            details["refined_coefficient"] = refined_coeff
            details["refined_bound"] = refined_coeff * eps
    return ConditionReport(
        condition_id="delta_below_threshold",
        lhs=d,
        threshold=DELTA_THRESHOLD,
        holds=bool(holds),
        error_bound_coefficient=coeff,
        inputs={"k": kk, "delta_k": d, "epsilon": eps},
        details=details,
    )


def dantzig_error_bound(delta_k: float, k: int, lam: float) -> float:
    """l2 error bound sqrt(k) * lambda / (0.307 - delta_k) for the
    residual-correlation program, valid when delta_k < 0.307, k > 1,
    and the noise satisfies ||Phi' z||_inf <= lambda.
    """
    d = float(delta_k)
    kk = int(k)
    if kk <= 1:
        raise PreconditionError(f"bound needs k > 1, got k={kk}")
    if float(lam) < 0.0:
        raise PreconditionError(f"lambda must be nonnegative, got {lam}")
    if not (0.0 <= d < DELTA_THRESHOLD):
        raise PreconditionError(f"bound needs delta_k in [0, 0.307), got {d}")
    return math.sqrt(kk) * float(lam) / (DELTA_THRESHOLD - d)


def general_signal_bound(delta_k: float, epsilon: float, tail_l1: float, k: int) -> float:
    """Error bound for signals that are only approximately k-sparse:

        eps / (0.307 - delta_k) + tail_l1 / (sqrt(k) * (0.307 - delta_k))

    where tail_l1 is the l1 norm of the signal minus its k largest
    magnitudes. Requires delta_k < 0.307 and k > 1.
    """
    d = float(delta_k)
    kk = int(k)
    eps = float(epsilon)
    tail = float(tail_l1)
    if kk < 1:
        raise PreconditionError(f"bound needs k >= 1, got k={kk}")
    if not (0.0 <= d < DELTA_THRESHOLD):
        raise PreconditionError(f"bound needs delta_k in [0, 0.307), got {d}")
    if eps < 0.0 or tail < 0.0:
        raise PreconditionError("epsilon and tail_l1 must be nonnegative")
    gap = DELTA_THRESHOLD - d
    return eps / gap + tail / (math.sqrt(kk) * gap)
