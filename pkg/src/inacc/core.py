"""Finite probability vectors, utility functions, and decision contexts.

Outcome spaces are X = {1, ..., n} with n >= 3 (1-based labels at the API
surface, 0-based tuples internally).  Everything is double precision; all
equality and inequality checks in the package run against the shared
tolerances defined here instead of exact comparison, because the log-ratio
scores are irrational and exactness is unrecoverable anyway.

All types are immutable after construction and every operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: sum-to-one slack accepted before renormalizing a probability vector
TOL_NORM = 1e-9
#: generic comparison tolerance for scores, posteriors and identities
TOL_NUM = 1e-9
#: max-norm radius within which two posteriors count as the same class
TOL_DEDUP = 1e-9
#: minimum gap required for scores to count as pairwise distinct
TOL_SEP = 1e-9

#: smallest supported outcome count
MIN_OUTCOMES = 3


class InaccError(Exception):
    """Base class for every domain error raised by this package."""


class DimensionMismatch(InaccError):
    """Two vectors that must share an outcome count do not."""


class TooSmall(InaccError):
    """Outcome count below the supported minimum of 3."""


class NotAProbability(InaccError):
    """Negative weight, non-finite weight, or sum != 1 beyond tolerance."""


class PriorHasZero(InaccError):
    """The credence p must be strictly positive everywhere."""


class PStarHasZero(InaccError):
    """Strict mode requires the target measure to be strictly positive."""


class TrivialContext(InaccError):
    """f1 dominates f2 pointwise, so the decision carries no content."""


class NonFiniteUtility(InaccError):
    """A utility function contains NaN or infinite entries."""


class OutOfRange(InaccError):
    """A scalar argument lies outside its documented domain."""


class NotInjective(InaccError):
    """The density ratio has ties, so the ordering machinery cannot run."""


class NotInBlindSpot(InaccError):
    """Construction requires the target to be unreachable by conditioning."""


class SeparationBelowTolerance(InaccError):
    """The available margin is within numeric tolerance of zero."""


class SeparationFailed(InaccError):
    """No separating direction found within the attempt budget."""


class NotAchievable(InaccError):
    """Requested degree is not in the achievable set."""


class RefusedTooLarge(InaccError):
    """Exhaustive enumeration refused: outcome count above resource guard."""


class VerificationFailed(InaccError):
    """A constructed object failed its own exhaustive re-verification."""


class TheoremViolation(InaccError):
    """A machine-checked theorem identity failed beyond tolerance.

    This can only arise from numeric error beyond tolerance or an
    implementation bug; it is never swallowed.
    """


def _as_float_tuple(values: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class ProbabilityVector:
    """Nonnegative weights over outcomes {1..n}, summing to one.

    Inputs whose sum is within ``TOL_NORM`` of 1 are renormalized so the
    stored weights sum to 1 exactly (up to float rounding); anything
    further off is rejected rather than silently fixed.
    """

    weights: tuple[float, ...]

    def __init__(self, weights: Iterable[float]):
        w = _as_float_tuple(weights)
        if len(w) < MIN_OUTCOMES:
            raise TooSmall(f"need at least {MIN_OUTCOMES} outcomes, got {len(w)}")
        if any(not math.isfinite(x) for x in w):
            raise NotAProbability("weights must be finite")
        if any(x < 0.0 for x in w):
            raise NotAProbability(f"negative weight in {w}")
        total = math.fsum(w)
        if abs(total - 1.0) > TOL_NORM:
            raise NotAProbability(f"weights sum to {total!r}, not 1")
        if total != 1.0:
            w = tuple(x / total for x in w)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "ProbabilityVector":
        if n < MIN_OUTCOMES:
            raise TooSmall(f"need at least {MIN_OUTCOMES} outcomes, got {n}")
        return cls([1.0 / n] * n)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def strictly_positive(self) -> bool:
        return min(self.weights) > 0.0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    def mass(self, outcomes: Iterable[int]) -> float:
        """Total weight of a set of 1-based outcome labels."""
        return math.fsum(self.weights[i - 1] for i in outcomes)


@dataclass(frozen=True)
class UtilityFunction:
    """Real payoff per outcome; entries must be finite."""

    values: tuple[float, ...]

    def __init__(self, values: Iterable[float]):
        v = _as_float_tuple(values)
        if any(not math.isfinite(x) for x in v):
            raise NonFiniteUtility(f"non-finite utility in {v}")
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls, n: int) -> "UtilityFunction":
        return cls([0.0] * n)

    @property
    def n(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def shifted(self, c: float) -> "UtilityFunction":
        """Pointwise subtraction of a constant: self - c."""
        return UtilityFunction(x - c for x in self.values)

    def minus(self, other: "UtilityFunction") -> "UtilityFunction":
        if other.n != self.n:
            raise DimensionMismatch(f"{self.n} vs {other.n} outcomes")
        return UtilityFunction(a - b for a, b in zip(self.values, other.values))


def expectation(f: UtilityFunction, q: ProbabilityVector) -> float:
    """Expected value of ``f`` under ``q``: sum_i f(i) q(i)."""
    if f.n != q.n:
        raise DimensionMismatch(f"utility has {f.n} outcomes, measure has {q.n}")
    return math.fsum(fi * qi for fi, qi in zip(f.values, q.weights))


@dataclass(frozen=True)
class DecisionContext:
    """A target measure, a strictly positive credence, and a pair of actions.

    Either supply both actions ``f1, f2`` or the advantage ``d`` directly;
    with ``d`` alone the canonical pair (f1, f2) = (d, 0) is implied.
    """

    p_star: ProbabilityVector
    p: ProbabilityVector
    f1: UtilityFunction | None = None
    f2: UtilityFunction | None = None
    d: UtilityFunction | None = None

    def __post_init__(self):
        if self.d is None and (self.f1 is None or self.f2 is None):
            raise OutOfRange("supply either d or both f1 and f2")


@dataclass(frozen=True)
class ValidatedContext:
    """A decision context that passed validation, with d materialized."""

    p_star: ProbabilityVector
    p: ProbabilityVector
    f1: UtilityFunction
    f2: UtilityFunction
    d: UtilityFunction

    @property
    def n(self) -> int:
        return self.p.n


def validate_context(ctx: DecisionContext) -> ValidatedContext:
    """Check a decision context and materialize d = f1 - f2.

    Rejects trivial contexts (f1 > f2 pointwise, i.e. d everywhere
    positive), zero entries in the credence p, and dimension mismatches.
    A context is accepted iff d has at least one non-positive entry.
    """
    p_star, p = ctx.p_star, ctx.p
    if p_star.n != p.n:
        raise DimensionMismatch(f"p* has {p_star.n} outcomes, p has {p.n}")
    if not p.strictly_positive:
        raise PriorHasZero("credence p must be strictly positive")
    if ctx.d is not None:
        d = ctx.d
        f1 = ctx.f1 if ctx.f1 is not None else d
        f2 = ctx.f2 if ctx.f2 is not None else UtilityFunction.zero(d.n)
    else:
        assert ctx.f1 is not None and ctx.f2 is not None
        f1, f2 = ctx.f1, ctx.f2
        d = f1.minus(f2)
    if d.n != p.n:
        raise DimensionMismatch(f"utilities have {d.n} outcomes, measures have {p.n}")
    if all(x > 0.0 for x in d.values):
        raise TrivialContext("f1 exceeds f2 on every outcome")
    return ValidatedContext(p_star=p_star, p=p, f1=f1, f2=f2, d=d)


def require_same_n(*items: ProbabilityVector | UtilityFunction) -> int:
    """Common outcome count of the arguments, or DimensionMismatch."""
    ns = {item.n for item in items}
    if len(ns) != 1:
        raise DimensionMismatch(f"mixed outcome counts {sorted(ns)}")
    return ns.pop()


def scores_close(a: float, b: float, tol: float = TOL_NUM) -> bool:
    return abs(a - b) <= tol


def max_abs_diff(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise DimensionMismatch(f"{len(a)} vs {len(b)} entries")
    return max(abs(x - y) for x, y in zip(a, b))
