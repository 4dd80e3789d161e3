"""Per-slot predict, allocate, reveal, evaluate loop for URLLC link adaptation.

At every evaluation slot an estimator supplies an interference power
forecast ``I_p``. The blocklength is chosen from the predicted SINR
``P_s / (I_p + N0)`` and then scored at the SINR the slot actually had.
The desired-signal power ``P_s`` is taken as known, so interference
estimation is the only source of error.
"""

import csv
import json
import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import ScenarioConfig, compose_received, db_to_linear, interference_power_series
from .errors import ConfigError
from .fbl import block_error, min_blocklength

log = logging.getLogger(__name__)

DEFAULT_TARGETS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
DEFAULT_PAYLOAD_BITS = 50
DEFAULT_ALPHA = 0.01
MA_INDEX = ("printed", "recent")


@dataclass
class AllocationRecord:
    slot: int
    target_error: float
    predicted_interference: float
    predicted_sinr: float
    chosen_blocklength: int
    actual_interference: float
    actual_sinr: float
    achieved_error: float


@dataclass
class OutageCurve:
    target_errors: list
    achieved_outages: list
    estimator_label: str
    # share of slots whose achieved error exceeded the target
    exceedance: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.target_errors) != len(self.achieved_outages):
            raise ConfigError("target and outage lists differ in length")


@dataclass
class MaEstimatorState:
    alpha: float
    previous_estimate: float
    previous_measurement: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")


def ma_step(state: MaEstimatorState, new_measurement: float, index="printed"):
    """One step of ``J_hat[t+1] = a * J[t-1] + (1 - a) * J_hat[t]``.

    ``new_measurement`` is J[t]. With ``index="printed"`` it is only stored
    and the estimate uses the older J[t-1]; ``"recent"`` uses J[t] at once.
    """
    if index == "printed":
        used = state.previous_measurement
    elif index == "recent":
        used = new_measurement
    else:
        raise ConfigError(f"ma index must be one of {MA_INDEX}, got {index!r}")
    estimate = state.alpha * used + (1.0 - state.alpha) * state.previous_estimate
    return estimate, MaEstimatorState(state.alpha, estimate, float(new_measurement))


def predicted_sinr(signal_power, predicted_interference, noise_power):
    """``P_s / (I_p + N0)``; negative interference predictions clamp to 0."""
    ip = np.asarray(predicted_interference, dtype=float)
    n_neg = int(np.count_nonzero(ip < 0))
    if n_neg:
        warnings.warn(f"{n_neg} negative interference prediction(s) clamped to 0",
                      RuntimeWarning, stacklevel=2)
        ip = np.maximum(ip, 0.0)
    out = np.asarray(signal_power, dtype=float) / (ip + noise_power)
    return float(out) if out.ndim == 0 else out


def genie_estimates(actual, slots):
    return np.asarray(actual, dtype=float)[np.asarray(slots)]


def ma_estimates(measurements, slots, alpha=DEFAULT_ALPHA, index="printed"):
    """Moving-average forecasts for each slot in the contiguous span ``slots``.

    The recursion starts at the first evaluation slot from the mean of all
    earlier measurements, so no future sample leaks in.
    """
    j = np.asarray(measurements, dtype=float)
    slots = np.asarray(slots)
    first = int(slots[0])
    if first < 2 or np.any(np.diff(slots) != 1):
        raise ConfigError("ma estimator needs a contiguous slot span starting at index >= 2")
    state = MaEstimatorState(alpha, float(np.mean(j[:first])), float(j[first - 2]))
    out = np.empty(len(slots))
    for i, t in enumerate(slots):
        out[i], state = ma_step(state, j[t - 1], index)
    return out


def predictor_estimates(forecast, slots, scale="db"):
    """Linear interference forecasts from a ForecastResult aligned to ``slots``."""
    idx = np.asarray(forecast.slot_indices)
    if len(idx) != len(slots) or np.any(idx != np.asarray(slots)):
        raise ConfigError(
            f"{forecast.predictor}/{forecast.pipeline} forecast covers slots "
            f"{idx[0] if len(idx) else None}..{idx[-1] if len(idx) else None}, "
            f"allocation expects {slots[0]}..{slots[-1]}"
        )
    pred = np.asarray(forecast.predicted, dtype=float)
    if scale == "db":
        return db_to_linear(pred)
    if scale == "linear":
        return pred
    raise ConfigError(f"scale must be 'db' or 'linear', got {scale!r}")


@dataclass
class AllocationRun:
    label: str
    records: dict  # target -> list of AllocationRecord
    curve: OutageCurve
    clamped_predictions: int = 0


def run_allocation(signal_power, actual_interference, estimates, noise_power, targets,
                   payload_bits=DEFAULT_PAYLOAD_BITS, slots=None, label="estimator"):
    """Allocate at every slot and target, then score at the actual SINR.

    ``signal_power`` and ``actual_interference`` are full per-slot series;
    ``estimates`` holds one linear interference forecast per entry of ``slots``.
    """
    ps = np.asarray(signal_power, dtype=float)
    ia = np.asarray(actual_interference, dtype=float)
    slots = np.arange(len(ia)) if slots is None else np.asarray(slots)
    est = np.asarray(estimates, dtype=float)
    if len(est) != len(slots):
        raise ConfigError(f"{len(est)} estimates for {len(slots)} slots")
    if payload_bits < 1:
        raise ConfigError("payload_bits must be >= 1")
    for eps in targets:
        if not 0.0 < eps < 0.5:
            raise ConfigError(f"target {eps} outside (0, 0.5)")
    clamped = int(np.count_nonzero(est < 0))
    if clamped:
        log.warning("%s: %d negative interference prediction(s) clamped to 0", label, clamped)
        est = np.maximum(est, 0.0)

    delta_hat = ps[slots] / (est + noise_power)
    delta = ps[slots] / (ia[slots] + noise_power)
    records, outages, exceed = {}, [], []
    for eps in targets:
        rows = []
        for k, t in enumerate(slots):
            r = min_blocklength(delta_hat[k], payload_bits, eps)
            rows.append(AllocationRecord(int(t), float(eps), float(est[k]), float(delta_hat[k]), r,
                                         float(ia[t]), float(delta[k]),
                                         block_error(delta[k], payload_bits, r)))
        achieved = np.array([row.achieved_error for row in rows])
        records[eps] = rows
        outages.append(float(achieved.mean()))
        exceed.append(float(np.mean(achieved > eps)))
    curve = OutageCurve(list(map(float, targets)), outages, label, exceed)
    return AllocationRun(label, records, curve, clamped)


def allocate_scenario(scenario: ScenarioConfig, slots, forecasts=None, targets=DEFAULT_TARGETS,
                      payload_bits=DEFAULT_PAYLOAD_BITS, alpha=DEFAULT_ALPHA,
                      ma_index="printed", scale="db"):
    """Genie, moving-average and any predictor-backed runs on one scenario.

    ``forecasts`` maps a label to a ForecastResult made on this scenario's
    interference power series.
    """
    rx = compose_received(scenario)
    interference = interference_power_series(rx.interference, "linear")
    ps = rx.signal_power
    n0 = scenario.noise_power
    runs = {
        "genie": run_allocation(ps, interference, genie_estimates(interference, slots), n0,
                                targets, payload_bits, slots, "genie"),
        "ma": run_allocation(ps, interference, ma_estimates(interference, slots, alpha, ma_index),
                             n0, targets, payload_bits, slots, "ma"),
    }
    for label, fc in (forecasts or {}).items():
        runs[label] = run_allocation(ps, interference, predictor_estimates(fc, slots, scale), n0,
                                     targets, payload_bits, slots, label)
    return runs


RECORD_COLUMNS = ("slot", "target_error", "predicted_interference", "predicted_sinr",
                  "chosen_blocklength", "actual_interference", "actual_sinr", "achieved_error")


def write_records_csv(path, run: AllocationRun):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for rows in run.records.values():
            for rec in rows:
                w.writerow([repr(v) if isinstance(v, float) else v
                            for v in (getattr(rec, c) for c in RECORD_COLUMNS)])


def summary(runs):
    return {label: {**asdict(run.curve), "clamped_predictions": run.clamped_predictions}
            for label, run in runs.items()}


def write_summary_json(path, runs):
    with open(path, "w") as fh:
        json.dump(summary(runs), fh, indent=2, sort_keys=True)
        fh.write("\n")
