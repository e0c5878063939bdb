"""Binary symmetric channel induced by hard-decision BPSK over AWGN.

A crossover probability relates to Eb/N0 through ``p = Q(sqrt(2 R Eb/N0))``
and the hard-decision Shannon limit of a rate-``R`` code is the Eb/N0 at
which ``1 - h2(p) = R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class AboveLimitError(ValueError):
    pass


def entropy2(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def _bisect(f, lo: float, hi: float, tol: float, max_iter: int = 400) -> float:
    """Root of an increasing function on ``[lo, hi]``."""
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def entropy2_inv(h: float) -> float:
    """Inverse of ``entropy2`` on ``[0, 1/2]``."""
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"entropy {h} outside [0, 1]")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    return _bisect(lambda p: entropy2(p) - h, 0.0, 0.5, 1e-15)


def qfunc(x: float) -> float:
    """Gaussian tail probability P(N(0,1) > x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _crossover(rate: float, ebn0_lin: float) -> float:
    return qfunc(math.sqrt(2.0 * rate * ebn0_lin))


def _check_rate(rate: float):
    if not 0.0 < rate < 1.0:
        raise ValueError(f"rate {rate} outside (0, 1)")


def limit_crossover(rate: float) -> float:
    """Largest crossover probability at which BSC capacity still equals ``rate``."""
    _check_rate(rate)
    return entropy2_inv(1.0 - rate)


def _ebn0_for_crossover(rate: float, p: float) -> float:
    """Linear Eb/N0 giving crossover ``p``; Q is decreasing, so bisect in log space."""
    def f(log_e):
        return p - _crossover(rate, math.exp(log_e))
    log_e = _bisect(f, math.log(1e-9), math.log(1e9), 1e-13)
    return math.exp(log_e)


def shannon_limit_ebn0_lin(rate: float) -> float:
    _check_rate(rate)
    return _ebn0_for_crossover(rate, limit_crossover(rate))


def shannon_limit_ebn0(rate: float) -> float:
    """Hard-decision Shannon limit Eb/N0 in dB for code rate ``rate``."""
    return 10.0 * math.log10(shannon_limit_ebn0_lin(rate))


def gap_to_crossover(rate: float, gap_db: float) -> float:
    if gap_db < 0:
        raise ValueError(f"gap {gap_db} dB is negative")
    ebn0 = shannon_limit_ebn0_lin(rate) * 10.0 ** (gap_db / 10.0)
    return _crossover(rate, ebn0)


def crossover_to_gap(rate: float, p: float) -> float:
    p_star = limit_crossover(rate)
    if not 0.0 < p <= 0.5:
        raise ValueError(f"crossover {p} outside (0, 1/2]")
    if p > p_star * (1 + 1e-12):
        raise AboveLimitError(f"crossover {p} is above the rate-{rate} limit {p_star}")
    if p >= p_star:
        return 0.0
    ratio = _ebn0_for_crossover(rate, p) / shannon_limit_ebn0_lin(rate)
    return 10.0 * math.log10(ratio)


@dataclass(frozen=True)
class ChannelPoint:
    rate: float
    gap_db: float
    p: float
    ebn0_db: float

    @classmethod
    def from_gap(cls, rate: float, gap_db: float) -> "ChannelPoint":
        p = gap_to_crossover(rate, gap_db)
        return cls(rate, gap_db, p, shannon_limit_ebn0(rate) + gap_db)

    @classmethod
    def from_crossover(cls, rate: float, p: float) -> "ChannelPoint":
        gap = crossover_to_gap(rate, p)
        return cls(rate, gap, p, shannon_limit_ebn0(rate) + gap)
