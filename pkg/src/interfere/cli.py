"""Command-line driver: ``interfere <subcommand> [options]``.

Every subcommand writes plain CSV/JSON artifacts under the output
directory, resolved in order from ``--out``, the config's ``output_dir``,
``$INTERFERE_OUTPUT_ROOT/<subcommand>`` and ``./runs/<subcommand>``.
Errors are printed to stderr as one JSON object and the process exits
nonzero.
"""

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import allocation as alloc_mod
from .cancellation import forecast_and_cancel, write_cancellation_csv, write_metrics_json
from .channel import (compose_received, interference_power_series, write_power_csv,
                      write_trace_csv)
from .config import load_config
from .emd import SiftConfig, decompose
from .errors import ConfigError, InputError, InterfereError
from .forecast import checkpoint
from .forecast.dataset import build_dataset
from .forecast.pipelines import run_forecast

log = logging.getLogger("interfere")

OUTPUT_ROOT_ENV = "INTERFERE_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NOT_FOUND = 3
EXIT_INPUT = 4


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _config(args):
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["global_seed"] = args.seed
    if getattr(args, "scale", None):
        overrides["scale"] = args.scale
    if getattr(args, "ma_index", None):
        overrides["allocation"] = {"ma_index": args.ma_index}
    if getattr(args, "pipeline", None):
        overrides["pipeline"] = args.pipeline
    if getattr(args, "table2_literal", False):
        overrides["predictor"] = {"table2_literal": True}
    cfg = load_config(args.config, overrides)
    if args.table2_literal and cfg.predictor_kind != "transformer":
        raise ConfigError("--table2-literal applies only to the transformer predictor")
    return cfg


def _out_dir(args, cfg=None):
    if args.out:
        out = Path(args.out)
    elif cfg is not None and cfg.output_dir:
        out = Path(cfg.output_dir)
    else:
        out = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs")) / args.command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print(obj):
    print(json.dumps(_jsonable(obj), indent=2, sort_keys=True))


def _resolved(cfg):
    """Config echo stored next to every artifact set."""
    return _jsonable({
        "global_seed": cfg.global_seed,
        "scenario": cfg.scenario,
        "predictor": {"kind": cfg.predictor_kind, **dataclasses.asdict(cfg.predictor)},
        "pipeline": cfg.pipeline,
        "scale": cfg.scale,
        "sift": cfg.sift,
        "allocation": cfg.allocation,
    })


def cmd_generate(args):
    cfg = _config(args)
    rx = compose_received(cfg.scenario)
    out = _out_dir(args, cfg)
    write_trace_csv(out / "received.csv", rx.received)
    write_trace_csv(out / "interference.csv", rx.interference)
    write_trace_csv(out / "desired.csv", rx.desired)
    write_trace_csv(out / "noise.csv", rx.noise)
    for i, tr in enumerate(rx.per_interferer):
        write_trace_csv(out / f"interferer_{i}.csv", tr)
    write_power_csv(out / "interference_power.csv", rx.interference)
    power = interference_power_series(rx.interference, "linear")
    stats = {
        "trace_length": cfg.scenario.trace_length,
        "n_interferers": len(rx.per_interferer),
        "mean_interference_power": float(power.mean()),
        "expected_interference_power": float(sum(cfg.scenario.link_power(l)
                                                 for l in cfg.scenario.interferers)),
        "mean_signal_power": float(rx.signal_power.mean()),
    }
    _write_json(out / "config.json", _resolved(cfg))
    _write_json(out / "summary.json", stats)
    _print(stats)
    return EXIT_OK


def _read_series(path, column):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError(f"{path}: empty file")
        if column is None:
            numeric = [c for c in reader.fieldnames if c != "index"]
            if not numeric:
                raise InputError(f"{path}: no data column")
            column = numeric[-1]
        if column not in reader.fieldnames:
            raise InputError(f"{path}: no column {column!r}; have {reader.fieldnames}")
        try:
            return np.array([float(row[column]) for row in reader])
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from exc


def cmd_decompose(args):
    series = _read_series(args.input, args.column)
    sift = SiftConfig(boundary_policy=args.boundary_policy).validate()
    dec = decompose(series, sift)
    out = _out_dir(args)
    names = [f"imf_{k + 1}" for k in range(dec.n_imfs)] + ["residual"]
    with open(out / "imfs.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index"] + names)
        cols = dec.components()
        for i in range(len(series)):
            w.writerow([i] + [repr(float(c[i])) for c in cols])
    norm = float(np.max(np.abs(series - dec.reconstruct())))
    stats = {"n_imfs": dec.n_imfs, "completeness_max_abs_error": norm,
             "sift_iterations": dec.sift_iterations}
    _write_json(out / "summary.json", stats)
    _print(stats)
    return EXIT_OK


def _forecast(cfg, workers):
    rx = compose_received(cfg.scenario)
    series = interference_power_series(rx.interference, cfg.scale)
    return run_forecast(series, cfg.predictor, cfg.pipeline, cfg.sift, workers)


def _write_forecast(out, cfg, result, stem="forecast"):
    with open(out / f"{stem}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "actual", "predicted"])
        for t, a, p in zip(result.slot_indices, result.actual, result.predicted):
            w.writerow([int(t), repr(float(a)), repr(float(p))])
    _write_json(out / f"{stem}.json", {**result.to_dict(), "scale": cfg.scale,
                                        "global_seed": cfg.global_seed})
    _write_json(out / "config.json", _resolved(cfg))


def cmd_forecast(args):
    cfg = _config(args)
    result = _forecast(cfg, args.workers)
    out = _out_dir(args, cfg)
    _write_forecast(out, cfg, result)
    _print(result.to_dict())
    return EXIT_OK


def cmd_train(args):
    cfg = _config(args)
    result = _forecast(cfg, args.workers)
    out = _out_dir(args, cfg)
    checkpoint.save(out / "model.json", result.models, cfg.pipeline)
    summary = {
        "pipeline": cfg.pipeline,
        "predictor": cfg.predictor_kind,
        "n_models": len(result.models),
        "final_epoch_loss": [float(m.epoch_losses[-1]) if getattr(m, "epoch_losses", None)
                             else None for m, _ in result.models],
    }
    _write_json(out / "train.json", summary)
    _write_forecast(out, cfg, result)
    _print(summary)
    return EXIT_OK


def cmd_allocate(args):
    cfg = _config(args)
    a = cfg.allocation
    forecasts = {}
    if "predictor" in a.estimators:
        result = _forecast(cfg, args.workers)
        slots = result.slot_indices
        forecasts[f"{cfg.predictor_kind}-{cfg.pipeline}"] = result
    else:
        window = getattr(cfg.predictor, "window", 10)
        slots = build_dataset(np.zeros(cfg.scenario.trace_length), window).validation_indices
    runs = alloc_mod.allocate_scenario(cfg.scenario, slots, forecasts, a.targets, a.payload_bits,
                                       a.alpha, a.ma_index, cfg.scale)
    runs = {k: v for k, v in runs.items() if k in a.estimators or k in forecasts}
    out = _out_dir(args, cfg)
    for label, run in runs.items():
        alloc_mod.write_records_csv(out / f"allocation_{label}.csv", run)
    with open(out / "outage_curves.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["estimator", "target_error", "achieved_outage", "exceedance"])
        for label, run in runs.items():
            c = run.curve
            for t, o, e in zip(c.target_errors, c.achieved_outages, c.exceedance):
                w.writerow([label, repr(t), repr(o), repr(e)])
    summary = alloc_mod.summary(runs)
    _write_json(out / "outage.json", summary)
    _write_json(out / "config.json", _resolved(cfg))
    if forecasts:
        # not named forecast.json, so report does not count it as a forecast run
        _write_forecast(out, cfg, next(iter(forecasts.values())), "predictor_forecast")
    _print(summary)
    return EXIT_OK


def cmd_cancel(args):
    cfg = _config(args)
    if cfg.predictor_kind != "transformer":
        raise ConfigError("cancellation uses the transformer predictor only")
    rx = compose_received(cfg.scenario)
    result = forecast_and_cancel(rx.interference, cfg.predictor, cfg.sift, args.workers)
    out = _out_dir(args, cfg)
    write_cancellation_csv(out / "cancellation.csv", result)
    write_metrics_json(out / "cancellation.json", result)
    _write_json(out / "config.json", _resolved(cfg))
    _print(result.metrics())
    return EXIT_OK


def cmd_report(args):
    forecasts, outages = [], {}
    for root in args.runs:
        root = Path(root)
        if not root.exists():
            raise FileNotFoundError(f"run directory {root} does not exist")
        for path in sorted(root.rglob("forecast.json")):
            with open(path) as fh:
                forecasts.append(json.load(fh))
        for path in sorted(root.rglob("outage.json")):
            with open(path) as fh:
                outages[str(path.parent)] = json.load(fh)
    if not forecasts and not outages:
        raise InputError(f"no runs found under {[str(r) for r in args.runs]}")

    cells = {}
    for fc in forecasts:
        cells.setdefault((fc["predictor"], fc["pipeline"]), []).append(fc["rmse"])
    predictors = sorted({k[0] for k in cells})
    table = {p: {pipe: (float(np.mean(cells[(p, pipe)])) if (p, pipe) in cells else None)
                 for pipe in ("conventional", "proposed")} for p in predictors}
    counts = {f"{p}/{pipe}": len(v) for (p, pipe), v in sorted(cells.items())}
    merged = {}
    for run_dir in sorted(outages):
        for label, curve in outages[run_dir].items():
            merged.setdefault(label, []).append(curve["achieved_outages"])
    curves = {label: {"mean_achieved_outage": np.mean(v, axis=0).tolist(), "n_runs": len(v)}
              for label, v in sorted(merged.items())}
    report = {"rmse": table, "n_runs": counts, "outage": curves}

    out = _out_dir(args)
    _write_json(out / "report.json", report)
    with open(out / "rmse_table.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["predictor", "conventional", "proposed"])
        for p in predictors:
            w.writerow([p] + ["" if table[p][k] is None else repr(table[p][k])
                              for k in ("conventional", "proposed")])
    _print(report)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="interfere", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, experiment=True):
        p.add_argument("--out", help="output directory")
        if experiment:
            p.add_argument("--config", help="JSON experiment config (defaults: Table 1 scenario)")
            p.add_argument("--seed", type=int, help="override global_seed")
            p.add_argument("--workers", type=int, default=1,
                           help="processes for per-component training")
            p.add_argument("--scale", choices=("db", "linear"),
                           help="forecast the interference power in dB or linear units")
            p.add_argument("--ma-index", choices=alloc_mod.MA_INDEX,
                           help="measurement index used by the moving-average estimator")
            p.add_argument("--pipeline", choices=("conventional", "proposed"))
            p.add_argument("--table2-literal", action="store_true",
                           help="transformer width = heads * head_size")

    p = sub.add_parser("generate", help="simulate traces and power series")
    common(p)
    p.set_defaults(func=cmd_generate)
    p = sub.add_parser("decompose", help="EMD of a series from a CSV file")
    common(p, experiment=False)
    p.add_argument("input", help="CSV file; the last non-index column is used by default")
    p.add_argument("--column")
    p.add_argument("--boundary-policy", choices=("mirror", "clamp"), default="mirror")
    p.set_defaults(func=cmd_decompose)
    for name, func, text in (("train", cmd_train, "train predictors and save a checkpoint"),
                             ("forecast", cmd_forecast, "one-step-ahead interference forecast"),
                             ("allocate", cmd_allocate, "blocklength allocation outage curves"),
                             ("cancel", cmd_cancel, "I/Q interference cancellation")):
        p = sub.add_parser(name, help=text)
        common(p)
        p.set_defaults(func=func)
    p = sub.add_parser("report", help="aggregate forecast and allocation runs")
    common(p, experiment=False)
    p.add_argument("runs", nargs="+", help="run directories to scan recursively")
    p.set_defaults(func=cmd_report)
    return parser


def _fail(code, exc):
    err = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        return _fail(EXIT_CONFIG, ConfigError("--workers must be at least 1"))
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except FileNotFoundError as exc:
        return _fail(EXIT_NOT_FOUND, exc)
    except (InputError, InterfereError) as exc:
        return _fail(EXIT_INPUT, exc)
    except (OSError, ValueError) as exc:
        return _fail(EXIT_ERROR, exc)


if __name__ == "__main__":
    sys.exit(main())
