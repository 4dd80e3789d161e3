"""Baseband interference cancellation from forecast I/Q components.

The real and imaginary parts of the interference are forecast as two
independent series and the forecasts are subtracted sample by sample.
"""

import csv
import json
import logging
from dataclasses import dataclass, replace

import numpy as np

from .channel import ComplexTrace, ScenarioConfig, compose_received
from .emd import SiftConfig
from .errors import InputError
from .forecast.pipelines import forecast_proposed, rmse
from .forecast.transformer import TransformerConfig
from .seeding import derive_seed

log = logging.getLogger(__name__)

SUPPRESSION_CAP_DB = 300.0


@dataclass
class CancellationResult:
    residual: ComplexTrace
    original: ComplexTrace
    suppression_db: float
    per_part_rmse: tuple
    predicted: ComplexTrace = None
    # positions of the evaluated samples in the source trace
    slot_indices: np.ndarray = None

    def metrics(self):
        return {"suppression_db": self.suppression_db,
                "rmse_real": self.per_part_rmse[0],
                "rmse_imag": self.per_part_rmse[1],
                "n_samples": len(self.original)}


def suppression_db(original, residual) -> float:
    """``10 log10(P_original / P_residual)``, capped at +-300 dB."""
    po = float(np.mean(np.abs(original) ** 2))
    pr = float(np.mean(np.abs(residual) ** 2))
    if pr == 0.0:
        return SUPPRESSION_CAP_DB if po > 0 else 0.0
    if po == 0.0:
        return -SUPPRESSION_CAP_DB
    return float(np.clip(10.0 * np.log10(po / pr), -SUPPRESSION_CAP_DB, SUPPRESSION_CAP_DB))


def cancel(interference, predicted_real, predicted_imag) -> CancellationResult:
    orig = interference.samples if isinstance(interference, ComplexTrace) else np.asarray(interference, complex)
    pr = np.asarray(predicted_real, dtype=float)
    pi = np.asarray(predicted_imag, dtype=float)
    if not (len(orig) == len(pr) == len(pi)):
        raise InputError(
            f"length mismatch: interference {len(orig)}, real {len(pr)}, imag {len(pi)}")
    if len(orig) == 0:
        raise InputError("nothing to cancel: empty span")
    residual = (orig.real - pr) + 1j * (orig.imag - pi)
    return CancellationResult(
        ComplexTrace(residual, "residual"),
        ComplexTrace(orig, "original"),
        suppression_db(orig, residual),
        (rmse(pr, orig.real), rmse(pi, orig.imag)),
        ComplexTrace(pr + 1j * pi, "predicted"),
    )


def forecast_and_cancel(trace: ComplexTrace, cfg: TransformerConfig = None,
                        sift: SiftConfig = None, workers: int = 1) -> CancellationResult:
    """Proposed-pipeline forecasts of both parts of ``trace``, then cancel."""
    cfg = cfg or TransformerConfig()
    x = trace.samples
    # the two parts get unrelated model seeds
    parts = [forecast_proposed(part, _part_config(cfg, name), sift, workers)
             for name, part in (("real", x.real), ("imag", x.imag))]
    idx = parts[0].slot_indices
    result = cancel(x[idx], parts[0].predicted, parts[1].predicted)
    result.slot_indices = idx
    log.info("suppression %.2f dB over %d samples", result.suppression_db, len(idx))
    return result


def _part_config(cfg, name):
    return replace(cfg, seed=derive_seed(cfg.seed, f"part-{name}"))


def run_cancellation(scenario: ScenarioConfig, cfg: TransformerConfig = None,
                     sift: SiftConfig = None, workers: int = 1) -> CancellationResult:
    rx = compose_received(scenario)
    return forecast_and_cancel(rx.interference, cfg, sift, workers)


def write_cancellation_csv(path, result: CancellationResult):
    idx = result.slot_indices if result.slot_indices is not None else np.arange(len(result.original))
    o, p, r = result.original.samples, result.predicted.samples, result.residual.samples
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "orig_re", "orig_im", "pred_re", "pred_im", "resid_re", "resid_im"])
        for k in range(len(o)):
            w.writerow([int(idx[k])] + [repr(float(v)) for v in
                                        (o[k].real, o[k].imag, p[k].real, p[k].imag,
                                         r[k].real, r[k].imag)])


def write_metrics_json(path, result: CancellationResult):
    with open(path, "w") as fh:
        json.dump(result.metrics(), fh, indent=2, sort_keys=True)
        fh.write("\n")
