"""Finite-blocklength normal approximation for the AWGN channel.

    eps ~= Q((C(d) * R - D) / sqrt(V(d) * R))

with ``C(d) = log2(1 + d)`` and ``V(d) = (1 - 1/(1 + d)**2) * log2(e)**2``,
``R`` the blocklength in channel uses and ``D`` the payload in bits.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import ConfigError, InfeasibleError

LOG2E = math.log2(math.e)
# doubling stops here; far beyond any practical blocklength
MAX_BLOCKLENGTH = 2 ** 40


@dataclass(frozen=True)
class CodingSpec:
    payload_bits: int
    target_error: float
    blocklength: int = 1

    def __post_init__(self):
        if int(self.payload_bits) != self.payload_bits or self.payload_bits < 1:
            raise ConfigError("payload_bits must be an integer >= 1")
        if not 0.0 < self.target_error <= 0.5:
            raise ConfigError("target_error must lie in (0, 0.5]")
        if int(self.blocklength) != self.blocklength or self.blocklength < 1:
            raise ConfigError("blocklength must be an integer >= 1")


def q_function(x):
    """Gaussian tail P[N(0, 1) > x]."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def capacity(sinr):
    return np.log2(1.0 + np.asarray(sinr, dtype=float))


def dispersion(sinr):
    s = np.asarray(sinr, dtype=float)
    return (1.0 - 1.0 / (1.0 + s) ** 2) * LOG2E ** 2


@dataclass(frozen=True)
class BlockError:
    probability: float
    # set when sinr == 0 and the approximation is 0/0
    degenerate: bool = False

    def __float__(self):
        return self.probability


def block_error_detail(sinr, payload_bits, blocklength) -> BlockError:
    if sinr < 0:
        raise ConfigError(f"sinr must be non-negative, got {sinr}")
    if sinr == 0:
        return BlockError(1.0, True)
    c, v = float(capacity(sinr)), float(dispersion(sinr))
    arg = (c * blocklength - payload_bits) / math.sqrt(v * blocklength)
    return BlockError(float(q_function(arg)))


def block_error(sinr, payload_bits, blocklength) -> float:
    """Approximate block error probability at a given blocklength."""
    return block_error_detail(sinr, payload_bits, blocklength).probability


def _check_args(sinr, payload_bits, target_error):
    if not sinr > 0:
        raise InfeasibleError(f"no blocklength meets the target at sinr={sinr}")
    if payload_bits < 1:
        raise ConfigError("payload_bits must be >= 1")
    if not 0.0 < target_error < 0.5:
        raise ConfigError("target_error must lie in (0, 0.5)")


def min_blocklength(sinr, payload_bits, target_error) -> int:
    """Smallest integer R >= 1 with ``block_error(sinr, D, R) <= target_error``.

    The Q argument ``(C R - D) / sqrt(V R)`` is strictly increasing in R for
    every R > 0, so the feasible set is an upward-closed interval and a
    doubling bracket followed by bisection finds its first element.
    """
    _check_args(sinr, payload_bits, target_error)
    if block_error(sinr, payload_bits, 1) <= target_error:
        return 1
    lo, hi = 1, 2
    while block_error(sinr, payload_bits, hi) > target_error:
        lo, hi = hi, hi * 2
        if hi > MAX_BLOCKLENGTH:
            raise InfeasibleError(
                f"blocklength above {MAX_BLOCKLENGTH} needed at sinr={sinr}")
    # invariant: infeasible at lo, feasible at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if block_error(sinr, payload_bits, mid) <= target_error:
            hi = mid
        else:
            lo = mid
    return hi


def min_blocklength_scan(sinr, payload_bits, target_error, limit=100_000) -> int:
    """Reference answer by exhaustive scan over R = 1..limit."""
    _check_args(sinr, payload_bits, target_error)
    for r in range(1, limit + 1):
        if block_error(sinr, payload_bits, r) <= target_error:
            return r
    raise InfeasibleError(f"no blocklength up to {limit} meets the target")
