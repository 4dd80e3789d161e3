"""Empirical mode decomposition by sifting.

A series is split into intrinsic mode functions (IMFs), highest local
frequency first, plus a slowly varying residual. By construction
``sum(imfs) + residual`` reproduces the input up to float round-off.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, EnvelopeDegenerateError, InputError

log = logging.getLogger(__name__)

BOUNDARY_POLICIES = ("mirror", "clamp")
# mirrored extrema added beyond each end
MIRROR_COUNT = 2
# remainder or IMF energy (relative to the input) below which sifting stops
ENERGY_FLOOR = 1e-20


@dataclass
class SiftConfig:
    max_imfs: int = 10
    max_sift_iterations: int = 100
    sd_threshold: float = 0.2
    boundary_policy: str = "mirror"
    # also require |#extrema - #zero crossings| <= 1 before accepting an IMF
    require_imf_condition: bool = True

    def validate(self):
        if self.max_imfs < 1:
            raise ConfigError("max_imfs must be at least 1")
        if self.max_sift_iterations < 1:
            raise ConfigError("max_sift_iterations must be at least 1")
        if not self.sd_threshold > 0:
            raise ConfigError("sd_threshold must be positive")
        if self.boundary_policy not in BOUNDARY_POLICIES:
            raise ConfigError(f"boundary_policy must be one of {BOUNDARY_POLICIES}")
        return self


@dataclass
class Decomposition:
    imfs: list
    residual: np.ndarray
    source_length: int
    sift_iterations: list = field(default_factory=list)

    @property
    def n_imfs(self) -> int:
        return len(self.imfs)

    def components(self):
        return list(self.imfs) + [self.residual]

    def reconstruct(self):
        total = np.array(self.residual, dtype=float, copy=True)
        for imf in self.imfs:
            total += imf
        return total


def find_extrema(series):
    """Indices of strict local maxima and minima.

    A flat run bounded by lower (higher) neighbours on both sides counts as
    one maximum (minimum) located at the middle of the run. The end samples
    are never extrema.
    """
    x = np.asarray(series, dtype=float)
    if len(x) < 3:
        return np.array([], dtype=int), np.array([], dtype=int)
    # collapse runs of equal values
    change = np.flatnonzero(np.diff(x) != 0)
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [len(x) - 1]))
    vals = x[starts]
    if len(vals) < 3:
        return np.array([], dtype=int), np.array([], dtype=int)
    left, mid, right = vals[:-2], vals[1:-1], vals[2:]
    mids = (starts[1:-1] + ends[1:-1]) // 2
    maxima = mids[(mid > left) & (mid > right)]
    minima = mids[(mid < left) & (mid < right)]
    return maxima.astype(int), minima.astype(int)


def _extend(series, anchors, policy):
    x = np.asarray(series, dtype=float)
    n = len(x)
    pos = np.asarray(anchors, dtype=float)
    val = x[np.asarray(anchors, dtype=int)]
    left_pos, left_val, right_pos, right_val = [], [], [], []
    if anchors[0] > 0:
        if policy == "mirror":
            k = min(MIRROR_COUNT, len(anchors))
            left_pos = -pos[:k][::-1]
            left_val = val[:k][::-1]
        else:
            left_pos, left_val = [0.0], [val[0]]
    if anchors[-1] < n - 1:
        if policy == "mirror":
            k = min(MIRROR_COUNT, len(anchors))
            right_pos = 2 * (n - 1) - pos[-k:][::-1]
            right_val = val[-k:][::-1]
        else:
            right_pos, right_val = [float(n - 1)], [val[-1]]
    return (np.concatenate([left_pos, pos, right_pos]),
            np.concatenate([left_val, val, right_val]))


def envelope(series, anchors, policy="mirror"):
    """Natural cubic spline through ``series[anchors]``, evaluated at every index.

    Ends are extended according to ``policy`` before fitting: ``mirror``
    reflects the outermost anchors about the end samples, ``clamp`` holds
    the outermost anchor value flat up to the end sample. An end that
    already carries an anchor is left alone. Two knots give a straight
    line, one knot a constant.
    """
    x = np.asarray(series, dtype=float)
    anchors = np.asarray(anchors, dtype=int)
    if anchors.size == 0:
        raise EnvelopeDegenerateError("no anchor points for envelope")
    if policy not in BOUNDARY_POLICIES:
        raise ConfigError(f"boundary policy must be one of {BOUNDARY_POLICIES}")
    if np.any(np.diff(anchors) <= 0):
        raise InputError("anchors must be strictly increasing")
    pos, val = _extend(x, anchors, policy)
    grid = np.arange(len(x), dtype=float)
    if len(pos) == 1:
        return np.full(len(x), val[0])
    if len(pos) == 2:
        slope = (val[1] - val[0]) / (pos[1] - pos[0])
        return val[0] + slope * (grid - pos[0])
    return CubicSpline(pos, val, bc_type="natural")(grid)


def count_zero_crossings(series):
    s = np.sign(np.asarray(series, dtype=float))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _is_imf(h):
    maxima, minima = find_extrema(h)
    return abs(len(maxima) + len(minima) - count_zero_crossings(h)) <= 1


def _sift(x, cfg):
    h = x.copy()
    for it in range(1, cfg.max_sift_iterations + 1):
        maxima, minima = find_extrema(h)
        if len(maxima) == 0 or len(minima) == 0:
            return h, it - 1
        mean_env = 0.5 * (envelope(h, maxima, cfg.boundary_policy)
                          + envelope(h, minima, cfg.boundary_policy))
        new = h - mean_env
        denom = float(np.sum(h * h))
        sd = float(np.sum((h - new) ** 2)) / denom if denom > 0 else 0.0
        h = new
        if sd < cfg.sd_threshold and (not cfg.require_imf_condition or _is_imf(h)):
            return h, it
    return h, cfg.max_sift_iterations


def decompose(series, cfg: SiftConfig = None) -> Decomposition:
    cfg = (cfg or SiftConfig()).validate()
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or len(x) < 8:
        raise InputError("decompose needs a one-dimensional series of length >= 8")
    if not np.all(np.isfinite(x)):
        raise InputError("series contains non-finite values")

    energy = float(np.sum(x * x))
    remainder = x.copy()
    imfs, iterations = [], []
    while len(imfs) < cfg.max_imfs:
        maxima, minima = find_extrema(remainder)
        if len(maxima) + len(minima) < 3:
            break
        if float(np.sum(remainder * remainder)) <= ENERGY_FLOOR * energy:
            break
        imf, n_iter = _sift(remainder, cfg)
        if float(np.sum(imf * imf)) <= ENERGY_FLOOR * energy:
            # only round-off wiggles left on top of a trend
            break
        imfs.append(imf)
        iterations.append(n_iter)
        remainder = remainder - imf
    # residual defined as the exact leftover of the running subtraction
    residual = x - np.sum(imfs, axis=0) if imfs else x.copy()
    log.debug("decomposed %d samples into %d IMFs", len(x), len(imfs))
    return Decomposition(imfs, residual, len(x), iterations)
