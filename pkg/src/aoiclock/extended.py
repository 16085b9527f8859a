"""Age analysis for the buffered model with phase shifts and lossy delivery.

This variant drops the instantaneous-delivery idealization: the source needs
its full period to produce an update (timestamped at the start slot, ready
one slot after), the link needs a slot to deliver, transmissions start at
slot delta_n and succeed independently with probability p, and generation
starts at slot delta_b.  A failed transmission discards nothing; the link
simply retries with the freshest buffered update at its next slot.

Conditioning on l, the number of transmission slots since the last success,
the age at the k-th read is again a closed form in floored moduli, and for
each fixed l the hyperperiod multiset decomposes into arithmetic progressions
exactly as in the lossless model, shifted up by 2 + l*n_period and rephased
by the deltas.  Marginalizing over the geometric distribution of l gives the
exact expectation as a certified truncated series.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .basic import AoiDistribution, BandedValue, ConfigError, PeriodDecomposition
from .modmath import ArithmeticProgression, Multiset, ceil_div, comp_mod, floor_mod

__all__ = [
    "SystemConfig",
    "GeometricExpectation",
    "aoi_conditional",
    "sequence_conditional",
    "c_extended",
    "progressions_conditional",
    "distribution_conditional",
    "freshness_offset_K",
    "expected_approx_extended",
    "expected_exact_extended",
    "rel_error_bound_extended",
    "max_bound_prob",
]

# Truncating the geometric series past this many terms means the requested
# tolerance is unreachable in reasonable time; refuse instead of spinning.
_MAX_TERMS = 10**6
_MAX_PROB_SCAN = 10**7

DEFAULT_TOL = Fraction(1, 2**40)


def _as_probability(p) -> Fraction:
    if isinstance(p, float):
        raise ConfigError(
            "p must be an exact rational (Fraction, int or string), not float"
        )
    try:
        p = Fraction(p)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse probability {p!r}") from exc
    if not 0 < p <= 1:
        raise ConfigError(f"p must be in (0, 1], got {p}")
    return p


@dataclass(frozen=True)
class SystemConfig:
    """A full system description: periods, phase shifts, loss, model flavor.

    ``model`` selects which semantics the simulator and the report use;
    the lossless model forces delta_b == delta_n == 0 and p == 1.
    """

    d: PeriodDecomposition
    delta_b: int = 0
    delta_n: int = 0
    p: Fraction = Fraction(1)
    model: str = "extended"

    def __post_init__(self):
        if self.model not in ("basic", "extended"):
            raise ConfigError(f"model must be 'basic' or 'extended', got {self.model!r}")
        if self.delta_b < 0 or self.delta_n < 0:
            raise ConfigError("phase shifts must be >= 0")
        object.__setattr__(self, "p", _as_probability(self.p))
        if self.model == "basic" and (self.delta_b or self.delta_n or self.p != 1):
            raise ConfigError("the lossless model has no phase shifts and p == 1")


@dataclass(frozen=True)
class GeometricExpectation:
    """A truncated geometric-series expectation with a certified remainder.

    The true expectation lies in [value, value + tail_bound]; terms_used is
    the number of series terms summed.
    """

    value: Fraction
    tail_bound: Fraction
    terms_used: int

    def __post_init__(self):
        if self.terms_used < 1:
            raise ValueError("terms_used must be >= 1")
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be >= 0")


def aoi_conditional(cfg: SystemConfig, k: int, l: int) -> int:
    """Age at the k-th read given l transmission slots since the last success."""
    if k < 0 or l < 0:
        raise ValueError("k and l must be >= 0")
    d = cfg.d
    t = k * d.a_period
    e = floor_mod(t - cfg.delta_n - 1, d.n_period)
    s = floor_mod(t - cfg.delta_b - 2 - l * d.n_period, d.b_period)
    return 2 + l * d.n_period + e + floor_mod(s - e, d.b_period)


def sequence_conditional(cfg: SystemConfig, l: int, start_cycle: int, count: int) -> np.ndarray:
    """Conditional ages at reads start_cycle, ..., start_cycle + count - 1."""
    d = cfg.d
    kernels.check_sequence_args(
        d.a_period, d.b_period, d.n_period, cfg.delta_b, cfg.delta_n, l, start_cycle, count
    )
    return kernels.seq_conditional(
        d.a_period, d.b_period, d.n_period, cfg.delta_b, cfg.delta_n, l, start_cycle, count
    )


def c_extended(cfg: SystemConfig, i: int, j: int, l: int) -> int:
    """Starting offset of progression (i, j) of the conditional hyperperiod."""
    d = cfg.d
    if not 0 <= i < d.a:
        raise ValueError(f"i must be in [0, {d.a}), got {i}")
    if not 0 <= j < d.N:
        raise ValueError(f"j must be in [0, {d.N}), got {j}")
    if l < 0:
        raise ValueError("l must be >= 0")
    ab = d.a * d.b
    an = d.a * d.n
    r_ab = floor_mod(i * d.a_period - cfg.delta_b - 2 - l * d.n_period, ab)
    r_an = floor_mod(i * d.a_period - cfg.delta_n - 1, an)
    return 2 + l * d.n_period + r_ab + ceil_div(r_an - r_ab + j * an, ab) * ab


def progressions_conditional(cfg: SystemConfig, l: int) -> tuple[ArithmeticProgression, ...]:
    d = cfg.d
    ab = d.a * d.b
    return tuple(
        ArithmeticProgression(c_extended(cfg, i, j, l), ab, d.B)
        for i in range(d.a)
        for j in range(d.N)
    )


def distribution_conditional(cfg: SystemConfig, l: int) -> AoiDistribution:
    """Exact conditional age distribution over one hyperperiod for fixed l."""
    progs = progressions_conditional(cfg, l)
    values: Multiset = Multiset()
    for pr in progs:
        values.update(pr.elements())
    return AoiDistribution(values, cfg.d.period, progs)


def freshness_offset_K(cfg: SystemConfig) -> int:
    """Constant age penalty of buffering and phase: 2 + comp_mod(delta_n + 1, n)."""
    return 2 + comp_mod(cfg.delta_n + 1, cfg.d.n)


def expected_approx_extended(cfg: SystemConfig) -> BandedValue:
    """Band (B' + N' - n)/2 + K + (1-p)/p * N' +- a*b/2 around the expectation."""
    d = cfg.d
    center = (
        Fraction(d.b_period + d.n_period - d.n, 2)
        + freshness_offset_K(cfg)
        + (1 - cfg.p) / cfg.p * d.n_period
    )
    return BandedValue(center, Fraction(d.a * d.b, 2))


def expected_exact_extended(cfg: SystemConfig, tol: Fraction = DEFAULT_TOL) -> GeometricExpectation:
    """Expectation of the age, marginalized over the geometric failure count.

    Sums p*(1-p)^l * mean_k(conditional age at l) term by term, stopping at
    the first L whose analytic tail bound
    (1-p)^L * (B' + N' + n_period*(L + (1-p)/p)) drops below ``tol``.  All
    arithmetic is exact; the result brackets the true expectation in
    [value, value + tail_bound].
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be > 0")
    d = cfg.d
    u, v = cfg.p.numerator, cfg.p.denominator
    w = v - u  # (1-p) = w/v
    c0 = d.b_period + d.n_period

    # smallest L >= 1 with w^L * (u*(c0 + N'*L) + w*N') * tol.den < tol.num * u * v^L
    tnum, tden = tol.numerator, tol.denominator
    wpow = w
    vpow = v
    L = 1
    while wpow * (u * (c0 + d.n_period * L) + w * d.n_period) * tden >= tnum * u * vpow:
        L += 1
        wpow *= w
        vpow *= v
        if L > _MAX_TERMS:
            raise ValueError(
                f"tolerance {tol} needs more than {_MAX_TERMS} series terms; "
                f"loosen tol or raise p"
            )
    tail_bound = Fraction(wpow * (u * (c0 + d.n_period * L) + w * d.n_period), u * vpow)

    period = d.period
    kernels.check_period_sums_args(
        d.a_period, d.b_period, d.n_period, cfg.delta_b, cfg.delta_n, L, period
    )
    sums = kernels.period_sums_conditional(
        d.a_period, d.b_period, d.n_period, cfg.delta_b, cfg.delta_n, L, period
    )

    acc = 0
    wl = 1
    for l in range(L):
        acc = acc * v + u * wl * int(sums[l])
        wl *= w
    return GeometricExpectation(Fraction(acc, v**L * period), tail_bound, L)


def rel_error_bound_extended(cfg: SystemConfig) -> Fraction:
    """Worst-case relative error of the extended band center, always finite."""
    d = cfg.d
    k_off = freshness_offset_K(cfg)
    denom = (
        (d.B - 1) * d.a * d.b
        + d.n * (d.a * d.N - 1)
        + 2 * (k_off + (1 - cfg.p) / cfg.p * d.n_period)
    )
    return Fraction(d.a * d.b) / denom


def max_bound_prob(cfg: SystemConfig, sigma: Fraction) -> int:
    """Age bound holding per read with probability at least sigma.

    Returns B' + N' - n + K + n_period * m with m the smallest integer such
    that (1-p)^(m+1) <= 1 - sigma, decided by exact rational comparison.
    """
    sigma = Fraction(sigma)
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must be in (0, 1), got {sigma}")
    d = cfg.d
    u, v = cfg.p.numerator, cfg.p.denominator
    w = v - u
    rn, rd = (1 - sigma).numerator, (1 - sigma).denominator
    # (w/v)^(m+1) <= rn/rd
    m = 0
    wpow = w
    vpow = v
    while wpow * rd > rn * vpow:
        m += 1
        wpow *= w
        vpow *= v
        if m > _MAX_PROB_SCAN:
            raise ValueError("sigma too close to 1 for this p")
    return d.b_period + d.n_period - d.n + freshness_offset_K(cfg) + d.n_period * m
