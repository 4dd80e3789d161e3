"""Correlated Rayleigh block-fading traces and received-signal composition.

One complex sample per slot. Each link's fading is a sum of
``N_SINUSOIDS`` complex exponentials (Jakes-style) with random phases and
arrival angles drawn one per equal-width sector of (0, pi), normalized to
unit mean power. Stratifying the angles keeps the Doppler frequencies
distinct, so time averages converge like ensemble averages. Link power is
carried separately as ``E = N0 * 10**(mean_power_db / 10)``.
"""

import csv
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, InputError
from .seeding import derive_seed, rng_for

log = logging.getLogger(__name__)

N_SINUSOIDS = 64
DB_FLOOR = -300.0
_CHUNK = 8192


class SymbolSource(str, Enum):
    UNIT_CONSTANT = "unit-constant"
    QPSK = "qpsk"
    CORRELATED_GAUSSIAN = "correlated-gaussian"


@dataclass
class LinkConfig:
    mean_power_db: float
    doppler_ts: float = 0.01
    symbol_source: str = SymbolSource.QPSK.value
    # AR(1) coefficient of the correlated-gaussian symbol process
    symbol_correlation: float = 0.99

    def validate(self):
        if not 0.0 < self.doppler_ts < 0.5:
            raise ConfigError(f"doppler_ts must lie in (0, 0.5), got {self.doppler_ts}")
        try:
            SymbolSource(self.symbol_source)
        except ValueError:
            raise ConfigError(
                f"unknown symbol_source {self.symbol_source!r}; "
                f"choose from {[s.value for s in SymbolSource]}"
            ) from None
        if not 0.0 <= self.symbol_correlation < 1.0:
            raise ConfigError("symbol_correlation must lie in [0, 1)")
        return self


@dataclass
class ScenarioConfig:
    desired: LinkConfig = field(default_factory=lambda: LinkConfig(20.0))
    interferers: list = field(default_factory=lambda: [
        LinkConfig(db) for db in (5.0, 2.0, 0.0, -3.0, -10.0, 1.0)])
    noise_power: float = 1.0
    trace_length: int = 200
    rng_seed: int = 0
    add_noise: bool = True

    def validate(self):
        if self.trace_length < 20:
            raise ConfigError(f"trace_length must be at least 20, got {self.trace_length}")
        if not self.noise_power >= 0:
            raise ConfigError("noise_power must be non-negative")
        self.desired.validate()
        for link in self.interferers:
            link.validate()
            if not self.desired.mean_power_db > link.mean_power_db:
                raise ConfigError(
                    "desired link mean power must exceed every interferer's "
                    f"({self.desired.mean_power_db} dB <= {link.mean_power_db} dB)"
                )
        if not 0 <= int(self.rng_seed) < 2 ** 64:
            raise ConfigError("rng_seed must be a 64-bit unsigned integer")
        return self

    def link_power(self, link: LinkConfig) -> float:
        return self.noise_power * 10.0 ** (link.mean_power_db / 10.0)


@dataclass
class ComplexTrace:
    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise InputError("trace samples must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(self.samples)):
            raise InputError(f"trace {self.label!r} contains non-finite samples")

    @property
    def sample_count(self) -> int:
        return len(self.samples)

    def __len__(self):
        return len(self.samples)


def generate_fading(config: LinkConfig, length: int, seed: int) -> ComplexTrace:
    """Unit-power Rayleigh fading with normalized Doppler ``config.doppler_ts``.

    Lag-k autocorrelation approaches ``J0(2*pi*doppler_ts*k)``.
    """
    config.validate()
    if length < 1:
        raise InputError("length must be at least 1")
    rng = np.random.default_rng(seed)
    angles = np.pi * (np.arange(N_SINUSOIDS) + rng.uniform(0.0, 1.0, N_SINUSOIDS)) / N_SINUSOIDS
    phases = rng.uniform(0.0, 2 * np.pi, N_SINUSOIDS)
    omega = 2 * np.pi * config.doppler_ts * np.cos(angles)
    h = np.empty(length, dtype=np.complex128)
    for start in range(0, length, _CHUNK):
        t = np.arange(start, min(start + _CHUNK, length))[:, None]
        h[start:start + len(t)] = np.exp(1j * (omega * t + phases)).sum(axis=1)
    h /= np.sqrt(N_SINUSOIDS)
    return ComplexTrace(h, "fading")


def generate_symbols(config: LinkConfig, length: int, seed: int) -> np.ndarray:
    """Unit-average-power symbol sequence of the link's symbol source."""
    rng = np.random.default_rng(seed)
    source = SymbolSource(config.symbol_source)
    if source is SymbolSource.UNIT_CONSTANT:
        return np.ones(length, dtype=np.complex128)
    if source is SymbolSource.QPSK:
        return np.exp(1j * (np.pi / 4 + np.pi / 2 * rng.integers(0, 4, length)))
    rho = config.symbol_correlation
    w = (rng.standard_normal(length) + 1j * rng.standard_normal(length)) / np.sqrt(2)
    w[0] /= np.sqrt(1 - rho ** 2)  # start in the stationary distribution
    return lfilter([np.sqrt(1 - rho ** 2)], [1.0, -rho], w)


def link_signal(scenario: ScenarioConfig, link: LinkConfig, label: str):
    """Return ``(sqrt(E) * h * s, sqrt(E) * h)`` for one link."""
    n, seed = scenario.trace_length, scenario.rng_seed
    h = generate_fading(link, n, derive_seed(seed, f"{label}/fading")).samples
    s = generate_symbols(link, n, derive_seed(seed, f"{label}/symbols"))
    gain = np.sqrt(scenario.link_power(link)) * h
    return gain * s, gain


@dataclass
class ReceivedSignal:
    received: ComplexTrace
    interference: ComplexTrace
    per_interferer: list
    desired: ComplexTrace
    # sqrt(E_s) * h_s, whose squared magnitude is the per-slot signal power
    desired_gain: ComplexTrace
    noise: ComplexTrace

    def __iter__(self):
        # unpacks as (received, interference, per_interferer)
        return iter((self.received, self.interference, self.per_interferer))

    @property
    def signal_power(self) -> np.ndarray:
        g = self.desired_gain.samples
        return g.real ** 2 + g.imag ** 2


def compose_received(scenario: ScenarioConfig) -> ReceivedSignal:
    scenario.validate()
    n = scenario.trace_length
    desired, desired_gain = link_signal(scenario, scenario.desired, "desired")
    per = []
    for i, link in enumerate(scenario.interferers):
        sig, _ = link_signal(scenario, link, f"interferer-{i}")
        per.append(ComplexTrace(sig, f"interferer-{i}"))
    interference = np.sum([p.samples for p in per], axis=0) if per else np.zeros(n, complex)
    if scenario.add_noise and scenario.noise_power > 0:
        rng = rng_for(scenario.rng_seed, "noise")
        noise = np.sqrt(scenario.noise_power / 2) * (
            rng.standard_normal(n) + 1j * rng.standard_normal(n))
    else:
        noise = np.zeros(n, dtype=np.complex128)
    received = desired + interference + noise
    return ReceivedSignal(
        ComplexTrace(received, "received"),
        ComplexTrace(interference, "interference"),
        per,
        ComplexTrace(desired, "desired"),
        ComplexTrace(desired_gain, "desired-gain"),
        ComplexTrace(noise, "noise"),
    )


def interference_power_series(interference, scale="db") -> np.ndarray:
    """Per-slot ``|I|^2``, optionally in dB with a floor at -300 dB."""
    samples = interference.samples if isinstance(interference, ComplexTrace) else np.asarray(interference)
    if samples.size == 0:
        raise InputError("empty trace")
    power = samples.real ** 2 + samples.imag ** 2
    if scale == "linear":
        return power
    if scale == "db":
        return linear_to_db(power)
    raise ConfigError(f"scale must be 'linear' or 'db', got {scale!r}")


def linear_to_db(power):
    with np.errstate(divide="ignore"):
        return np.maximum(10.0 * np.log10(np.asarray(power, dtype=float)), DB_FLOOR)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def write_trace_csv(path, trace: ComplexTrace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for i, z in enumerate(trace.samples):
            w.writerow([i, repr(float(z.real)), repr(float(z.imag))])


def write_power_csv(path, trace: ComplexTrace):
    lin = interference_power_series(trace, "linear")
    db = linear_to_db(lin)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "power_linear", "power_db"])
        for i, (a, b) in enumerate(zip(lin, db)):
            w.writerow([i, repr(float(a)), repr(float(b))])


def read_trace_csv(path, label="") -> ComplexTrace:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return ComplexTrace([complex(float(r["real"]), float(r["imag"])) for r in rows], label)
