"""Array kernels with a numba fast path and a vectorized numpy fallback.

The backend is chosen once at import time: numba when it is importable and
the environment variable ``AOICLOCK_NO_NUMBA`` is unset (or "0"), numpy
otherwise.  Both implementations of every kernel are kept in ``IMPLS`` so
tests and benchmarks can run them side by side; they must agree bit for bit.

All kernels work in int64.  Callers go through the ``check_*`` guards, which
reject inputs whose intermediate values could leave the int64 range; the
kernels themselves assume the guards have run.

The simulators draw Bernoulli variates from a counter-based splitmix64
generator: the variate for transmission slot index m depends only on
(seed, m), so traces are reproducible across backends and chunk sizes.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("AOICLOCK_NO_NUMBA", "").strip() not in ("1", "true", "yes")

# splitmix64 constants
_GOLD = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Inputs are capped so every intermediate (slot numbers, k*A', sums over one
# period) stays well inside int64.
_SLOT_LIMIT = 1 << 62


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# guards

def check_sequence_args(a_period, b_period, n_period, delta_b, delta_n, l, k0, count):
    if min(a_period, b_period, n_period) < 1:
        raise ValueError("periods must be >= 1")
    if delta_b < 0 or delta_n < 0 or l < 0 or k0 < 0 or count < 0:
        raise ValueError("delta_b, delta_n, l, k0 and count must be >= 0")
    top = (k0 + count) * a_period + delta_b + delta_n + (l + 2) * n_period + 2
    if top >= _SLOT_LIMIT:
        raise OverflowError("inputs too large for 64-bit kernels")


def check_period_sums_args(a_period, b_period, n_period, delta_b, delta_n, n_terms, period):
    check_sequence_args(a_period, b_period, n_period, delta_b, delta_n, max(n_terms - 1, 0), period, 1)
    # one period's sum of conditional ages, worst case
    if period * (2 + b_period + (n_terms + 1) * n_period) >= _SLOT_LIMIT:
        raise OverflowError("period sums would overflow int64")


def check_simulate_args(a_period, b_period, n_period, delta_b, delta_n, cycles):
    if min(a_period, b_period, n_period) < 1:
        raise ValueError("periods must be >= 1")
    if delta_b < 0 or delta_n < 0:
        raise ValueError("phase shifts must be >= 0")
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    if cycles * a_period + delta_b + delta_n + b_period + n_period >= _SLOT_LIMIT:
        raise OverflowError("slot numbers would overflow int64")


# ---------------------------------------------------------------------------
# numpy implementations

def _seq_basic_np(a_period, b_period, n_period, k0, count):
    t = np.arange(k0, k0 + count, dtype=np.int64) * a_period
    e = t % n_period
    return e + ((t % b_period) - e) % b_period


def _seq_conditional_np(a_period, b_period, n_period, delta_b, delta_n, l, k0, count):
    t = np.arange(k0, k0 + count, dtype=np.int64) * a_period
    e = (t - delta_n - 1) % n_period
    s = (t - delta_b - 2 - l * n_period) % b_period
    return 2 + l * n_period + e + (s - e) % b_period


def _period_sums_conditional_np(a_period, b_period, n_period, delta_b, delta_n, n_terms, period):
    t = np.arange(1, period + 1, dtype=np.int64) * a_period
    e = (t - delta_n - 1) % n_period
    e_sum = int(e.sum())
    base = t - delta_b - 2
    out = np.empty(n_terms, dtype=np.int64)
    for l in range(n_terms):
        s = (base - l * n_period) % b_period
        out[l] = (2 + l * n_period) * period + e_sum + int(((s - e) % b_period).sum())
    return out


def _sim_basic_np(a_period, b_period, n_period, cycles):
    # delivery at a link slot is usable the same slot; the freshest update at
    # that slot is the newest source completion not after it
    t = np.arange(cycles, dtype=np.int64) * a_period
    tau = (t // n_period) * n_period
    return t - (tau // b_period) * b_period


def _splitmix64_np(seed, counters):
    z = (counters + np.uint64(1)) * np.uint64(_GOLD) + np.uint64(seed)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _sim_extended_np(a_period, b_period, n_period, delta_b, delta_n, threshold, seed, cycles):
    ages = np.full(cycles, -1, dtype=np.int64)
    fails = np.full(cycles, -1, dtype=np.int64)
    t_last = (cycles - 1) * a_period
    n_tx = 0 if t_last - 1 < delta_n else (t_last - 1 - delta_n) // n_period + 1
    if n_tx > 0:
        m = np.arange(n_tx, dtype=np.uint64)
        u53 = _splitmix64_np(np.uint64(seed), m) >> np.uint64(11)
        success = u53 < np.uint64(threshold)
        tau = delta_n + np.arange(n_tx, dtype=np.int64) * n_period
        # newest source completion strictly before each transmission slot
        buf = delta_b + ((tau - 1 - delta_b) // b_period) * b_period
        buf[tau - 1 < delta_b] = -1
        deliver = success & (buf >= 0)
        d_tau = tau[deliver]
        d_ts = buf[deliver]
        succ_m = np.nonzero(success)[0].astype(np.int64)
        succ_tau = tau[success]

        t = np.arange(cycles, dtype=np.int64) * a_period
        di = np.searchsorted(d_tau, t, side="left") - 1
        si = np.searchsorted(succ_tau, t, side="left") - 1
        tx_before = np.where(t - 1 < delta_n, 0, (t - 1 - delta_n) // n_period + 1)
        ok = di >= 0
        ages[ok] = t[ok] - d_ts[di[ok]]
        fails[ok] = tx_before[ok] - 1 - succ_m[si[ok]]
    return ages, fails


# ---------------------------------------------------------------------------
# numba implementations (loop form of the same kernels)

def _seq_basic_loop(a_period, b_period, n_period, k0, count):
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        t = (k0 + i) * a_period
        e = t % n_period
        out[i] = e + ((t % b_period) - e) % b_period
    return out


def _seq_conditional_loop(a_period, b_period, n_period, delta_b, delta_n, l, k0, count):
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        t = (k0 + i) * a_period
        e = (t - delta_n - 1) % n_period
        s = (t - delta_b - 2 - l * n_period) % b_period
        out[i] = 2 + l * n_period + e + (s - e) % b_period
    return out


def _period_sums_conditional_loop(a_period, b_period, n_period, delta_b, delta_n, n_terms, period):
    out = np.zeros(n_terms, dtype=np.int64)
    for l in range(n_terms):
        acc = 0
        for k in range(1, period + 1):
            t = k * a_period
            e = (t - delta_n - 1) % n_period
            s = (t - delta_b - 2 - l * n_period) % b_period
            acc += 2 + l * n_period + e + (s - e) % b_period
        out[l] = acc
    return out


def _sim_basic_loop(a_period, b_period, n_period, cycles):
    ages = np.empty(cycles, dtype=np.int64)
    next_b = 0
    next_n = 0
    next_read = 0
    avail = -1
    recv = -1
    k = 0
    while k < cycles:
        t = next_b
        if next_n < t:
            t = next_n
        if next_read < t:
            t = next_read
        # same-slot order: source completes, link delivers, reader reads
        if t == next_b:
            avail = t
            next_b += b_period
        if t == next_n:
            recv = avail
            next_n += n_period
        if t == next_read:
            ages[k] = t - recv
            k += 1
            next_read += a_period
    return ages


def _sim_extended_loop(a_period, b_period, n_period, delta_b, delta_n, threshold, seed, cycles):
    ages = np.full(cycles, -1, dtype=np.int64)
    fails = np.full(cycles, -1, dtype=np.int64)
    thresh64 = np.uint64(threshold)
    seed64 = np.uint64(seed)
    next_b = delta_b  # next source generation start
    next_tx = delta_n  # next link transmission slot
    buf = -1  # newest completed update at the link
    recv = -1  # newest delivered update at the reader
    m = np.uint64(0)  # transmission slot index, drives the rng
    since = 0  # transmission slots since the last Bernoulli success
    for k in range(cycles):
        t = k * a_period
        # a read at t sees deliveries from slots <= t-1 only
        while next_tx <= t - 1:
            tau = next_tx
            while next_b <= tau - 1:
                buf = next_b
                next_b += b_period
            z = (m + np.uint64(1)) * np.uint64(_GOLD) + seed64
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
            m += np.uint64(1)
            if (z >> np.uint64(11)) < thresh64:
                if buf >= 0:
                    recv = buf
                since = 0
            else:
                since += 1
            next_tx += n_period
        if recv >= 0:
            ages[k] = t - recv
            fails[k] = since
    return ages, fails


_NUMPY_IMPLS = {
    "seq_basic": _seq_basic_np,
    "seq_conditional": _seq_conditional_np,
    "period_sums_conditional": _period_sums_conditional_np,
    "sim_basic": _sim_basic_np,
    "sim_extended": _sim_extended_np,
}

IMPLS = {"numpy": _NUMPY_IMPLS}

if HAVE_NUMBA:
    IMPLS["numba"] = {
        "seq_basic": njit(cache=True)(_seq_basic_loop),
        "seq_conditional": njit(cache=True)(_seq_conditional_loop),
        "period_sums_conditional": njit(cache=True)(_period_sums_conditional_loop),
        "sim_basic": njit(cache=True)(_sim_basic_loop),
        "sim_extended": njit(cache=True)(_sim_extended_loop),
    }

_ACTIVE = IMPLS[backend()]

seq_basic = _ACTIVE["seq_basic"]
seq_conditional = _ACTIVE["seq_conditional"]
period_sums_conditional = _ACTIVE["period_sums_conditional"]
sim_basic = _ACTIVE["sim_basic"]
sim_extended = _ACTIVE["sim_extended"]
