"""RMSE of every (predictor, pipeline) pair on seeded Table 1 scenarios.

Prints the per-seed RMSEs, the mean table, the ordering counts and the
relative RMSE reduction of the proposed transformer.
"""

import argparse
import json
import time

import numpy as np

from interfere.channel import ScenarioConfig, compose_received, interference_power_series
from interfere.forecast.arima import ArimaConfig
from interfere.forecast.lstm import LstmConfig
from interfere.forecast.pipelines import run_forecast
from interfere.forecast.transformer import TransformerConfig

PREDICTORS = ("transformer", "lstm", "arima")


def predictor(kind, seed):
    if kind == "transformer":
        return TransformerConfig(seed=seed)
    if kind == "lstm":
        return LstmConfig(seed=seed)
    return ArimaConfig()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--predictors", nargs="+", choices=PREDICTORS, default=list(PREDICTORS))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json")
    args = ap.parse_args()

    rmse = {}
    for seed in range(args.seeds):
        rx = compose_received(ScenarioConfig(rng_seed=seed))
        series = interference_power_series(rx.interference, "db")
        for kind in args.predictors:
            for pipeline in ("conventional", "proposed"):
                start = time.time()
                try:
                    r = run_forecast(series, predictor(kind, seed), pipeline, workers=args.workers).rmse
                except Exception as exc:  # ARIMA(30,1,0) can be short of rows on some IMFs
                    print(f"seed {seed} {kind}/{pipeline}: {type(exc).__name__}: {exc}")
                    r = float("nan")
                rmse.setdefault(f"{kind}/{pipeline}", []).append(r)
                print(f"seed {seed} {kind}/{pipeline}: {r:.4f} dB ({time.time() - start:.0f}s)",
                      flush=True)

    print("\nmean RMSE (dB)")
    for key, v in rmse.items():
        print(f"  {key:28s} {np.nanmean(v):.4f}")
    prop = np.array(rmse.get("transformer/proposed", []))
    for ref in ("transformer/conventional", "lstm/proposed"):
        if ref in rmse and len(prop):
            other = np.array(rmse[ref])
            wins = int(np.sum(prop <= other))
            gain = 100 * (1 - np.nanmean(prop) / np.nanmean(other))
            print(f"proposed transformer <= {ref}: {wins}/{len(prop)} seeds, "
                  f"mean RMSE reduction {gain:.1f}%")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rmse, fh, indent=2)


if __name__ == "__main__":
    main()
