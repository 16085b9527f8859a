"""Exact age-of-information analysis for the lossless, phase-aligned model.

Three periodic agents share a slotted clock: a source that regenerates its
value every ``b_period`` slots, a link that forwards the freshest value every
``n_period`` slots, and a reader that samples every ``a_period`` slots.  In
this model generation, forwarding and delivery are instantaneous, all three
schedules start at slot 0, and nothing is ever lost.

The age seen at the k-th read has a closed form built from floored moduli,
and over one hyperperiod its multiset of values decomposes into a small
family of arithmetic progressions.  That family gives the exact expectation,
a two-sided band around it, and a hard upper bound without enumerating
anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from . import kernels
from .modmath import ArithmeticProgression, Multiset, ceil_div, floor_mod

__all__ = [
    "ConfigError",
    "NullSequenceError",
    "PeriodDecomposition",
    "AoiDistribution",
    "BandedValue",
    "decompose",
    "aoi_basic",
    "sequence_basic",
    "c_basic",
    "progressions_basic",
    "distribution_basic",
    "expected_exact_basic",
    "expected_approx_basic",
    "rel_error_bound_basic",
    "max_bound_basic",
]


class ConfigError(ValueError):
    """Raised for period combinations the theory does not cover."""


class NullSequenceError(ValueError):
    """Raised when the age is identically zero and relative error is undefined."""


@dataclass(frozen=True)
class PeriodDecomposition:
    """The three periods split into shared and private factors.

    a = gcd(b_period, n_period), b = gcd(a_period, b_period) and
    n = gcd(a_period, n_period) are the pairwise shared factors; A, B, N are
    the private cofactors, so a_period = A*b*n, b_period = B*b*a and
    n_period = N*n*a.  Requires gcd(a_period, b_period, n_period) == 1, which
    also makes A, B, N pairwise coprime to the factors they sit next to.
    """

    a_period: int
    b_period: int
    n_period: int
    A: int
    B: int
    N: int
    a: int
    b: int
    n: int

    def __post_init__(self):
        ap, bp, np_ = self.a_period, self.b_period, self.n_period
        if min(ap, bp, np_) < 1:
            raise ConfigError("periods must be >= 1")
        if gcd(gcd(ap, bp), np_) != 1:
            raise ConfigError("periods share a common divisor")
        ok = (
            self.a == gcd(bp, np_)
            and self.b == gcd(ap, bp)
            and self.n == gcd(ap, np_)
            and self.A * self.b * self.n == ap
            and self.B * self.b * self.a == bp
            and self.N * self.n * self.a == np_
        )
        if not ok:
            raise ConfigError("inconsistent decomposition")

    @property
    def period(self) -> int:
        """Length of one age hyperperiod, counted in reads: a*B*N."""
        return self.a * self.B * self.N


def decompose(a_period: int, b_period: int, n_period: int) -> PeriodDecomposition:
    """Split the periods into shared/private factors, rejecting common divisors.

    A common factor of all three periods would leave whole residue classes of
    slots unused; rescale the time axis (divide all periods by the factor)
    instead of modelling it.
    """
    if min(a_period, b_period, n_period) < 1:
        raise ConfigError("periods must be >= 1")
    g = gcd(gcd(a_period, b_period), n_period)
    if g != 1:
        raise ConfigError(
            f"periods {a_period}, {b_period}, {n_period} share the common divisor {g}; "
            f"divide all three by it (rescale the time axis) and retry"
        )
    a = gcd(b_period, n_period)
    b = gcd(a_period, b_period)
    n = gcd(a_period, n_period)
    return PeriodDecomposition(
        a_period,
        b_period,
        n_period,
        a_period // (b * n),
        b_period // (b * a),
        n_period // (n * a),
        a,
        b,
        n,
    )


@dataclass(frozen=True)
class BandedValue:
    """An exact center with a symmetric half-width: value in [c - w, c + w]."""

    center: Fraction
    half_width: Fraction

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be >= 0")

    @property
    def low(self) -> Fraction:
        return self.center - self.half_width

    @property
    def high(self) -> Fraction:
        return self.center + self.half_width

    def contains(self, x) -> bool:
        return self.low <= x <= self.high


@dataclass(frozen=True)
class AoiDistribution:
    """Multiset of age values over one hyperperiod of ``period`` reads."""

    values: Multiset
    period: int
    progressions: tuple[ArithmeticProgression, ...] | None = None

    def __post_init__(self):
        total = sum(self.values.values())
        if total != self.period:
            raise ValueError(f"multiset holds {total} values, period says {self.period}")

    def min(self) -> int:
        return min(self.values)

    def max(self) -> int:
        return max(self.values)

    def mean(self) -> Fraction:
        return Fraction(sum(v * c for v, c in self.values.items()), self.period)

    def to_sorted_array(self) -> np.ndarray:
        out = np.empty(self.period, dtype=np.int64)
        pos = 0
        for v in sorted(self.values):
            c = self.values[v]
            out[pos : pos + c] = v
            pos += c
        return out


def aoi_basic(d: PeriodDecomposition, k: int) -> int:
    """Age at the k-th read: kA' mod N' + (kA' mod B' - kA' mod N') mod B'."""
    if k < 0:
        raise ValueError("k must be >= 0")
    t = k * d.a_period
    e = floor_mod(t, d.n_period)
    return e + floor_mod(floor_mod(t, d.b_period) - e, d.b_period)


def sequence_basic(d: PeriodDecomposition, start_cycle: int, count: int) -> np.ndarray:
    """Ages at reads start_cycle, ..., start_cycle + count - 1 as int64."""
    kernels.check_sequence_args(d.a_period, d.b_period, d.n_period, 0, 0, 0, start_cycle, count)
    return kernels.seq_basic(d.a_period, d.b_period, d.n_period, start_cycle, count)


def c_basic(d: PeriodDecomposition, i: int, j: int) -> int:
    """Starting offset of progression (i, j) of the hyperperiod decomposition.

    Index ranges: 0 <= i < a, 0 <= j < N.  The (i, j) progression is
    <c_basic(d, i, j), a*b, B>.
    """
    if not 0 <= i < d.a:
        raise ValueError(f"i must be in [0, {d.a}), got {i}")
    if not 0 <= j < d.N:
        raise ValueError(f"j must be in [0, {d.N}), got {j}")
    ab = d.a * d.b
    an = d.a * d.n
    r_ab = floor_mod(i * d.a_period, ab)
    r_an = floor_mod(i * d.a_period, an)
    return r_ab + ceil_div(r_an - r_ab + j * an, ab) * ab


def progressions_basic(d: PeriodDecomposition) -> tuple[ArithmeticProgression, ...]:
    """The a*N progressions whose union is one hyperperiod of ages."""
    ab = d.a * d.b
    return tuple(
        ArithmeticProgression(c_basic(d, i, j), ab, d.B)
        for i in range(d.a)
        for j in range(d.N)
    )


def distribution_basic(d: PeriodDecomposition) -> AoiDistribution:
    """Exact age distribution over one hyperperiod, from the progression family."""
    progs = progressions_basic(d)
    values: Multiset = Multiset()
    for pr in progs:
        values.update(pr.elements())
    return AoiDistribution(values, d.period, progs)


def expected_exact_basic(d: PeriodDecomposition) -> Fraction:
    """Closed-form mean age over one hyperperiod, exact."""
    a, b, n, B, N = d.a, d.b, d.n, d.B, d.N
    r = N % b
    tail = 0
    for i in range(a):
        base = (i * b) // a
        for j in range(r):
            tail += floor_mod((j - base) * n, b)
    correction = (
        Fraction(a * (b + 1), 2) * (N // b)
        + ceil_div(r * a, b)
        + Fraction(tail, b)
    )
    return Fraction(d.b_period + d.n_period - n + a * b, 2) - Fraction(b, N) * correction


def expected_approx_basic(d: PeriodDecomposition) -> BandedValue:
    """Two-sided band (B' + N' - n)/2 +- a*b/2 around the exact mean."""
    return BandedValue(
        Fraction(d.b_period + d.n_period - d.n, 2),
        Fraction(d.a * d.b, 2),
    )


def rel_error_bound_basic(d: PeriodDecomposition) -> Fraction:
    """Worst-case relative error of the band center against the exact mean.

    Undefined when the age is identically zero (B == 1 and a*N == 1), the
    only case where the exact mean vanishes.
    """
    denom = (d.B - 1) * d.a * d.b + d.n * (d.a * d.N - 1)
    if denom == 0:
        raise NullSequenceError(
            "age sequence is identically zero; relative error is unbounded"
        )
    return Fraction(d.a * d.b, denom)


def max_bound_basic(d: PeriodDecomposition) -> int:
    """Hard upper bound on any age: B' + N' - n."""
    return d.b_period + d.n_period - d.n
