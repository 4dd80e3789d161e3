"""Monte Carlo suppression of the I/Q cancellation pipeline.

Cases:
  sinusoid    one complex exponential of period 20 slots
  qpsk        Table 1 interferers, QPSK symbols, fast fading (doppler 0.25)
  narrowband  Table 1 interferers, correlated-gaussian symbols, doppler 0.005

Prints one line per seed and the median, and optionally writes JSON.
"""

import argparse
import json
import time
from dataclasses import replace

import numpy as np

from interfere.cancellation import forecast_and_cancel
from interfere.channel import ComplexTrace, ScenarioConfig, compose_received
from interfere.forecast.transformer import TransformerConfig


def case_trace(case, seed, length=200):
    if case == "sinusoid":
        t = np.arange(length)
        return ComplexTrace(3 * np.exp(2j * np.pi * t / 20), "sinusoid")
    base = ScenarioConfig(trace_length=length, rng_seed=seed)
    if case == "qpsk":
        links = [replace(l, symbol_source="qpsk", doppler_ts=0.25) for l in base.interferers]
    elif case == "narrowband":
        links = [replace(l, symbol_source="correlated-gaussian", doppler_ts=0.005)
                 for l in base.interferers]
    else:
        raise SystemExit(f"unknown case {case!r}")
    return compose_received(replace(base, interferers=links)).interference


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("case", choices=("sinusoid", "qpsk", "narrowband"))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json")
    args = ap.parse_args()

    values = []
    for seed in range(args.seeds):
        start = time.time()
        res = forecast_and_cancel(case_trace(args.case, seed), TransformerConfig(seed=seed),
                                  workers=args.workers)
        values.append(res.suppression_db)
        print(f"{args.case} seed {seed}: {res.suppression_db:.3f} dB "
              f"(rmse re {res.per_part_rmse[0]:.4f}, im {res.per_part_rmse[1]:.4f}, "
              f"{time.time() - start:.0f}s)", flush=True)
    print(f"{args.case} median {np.median(values):.3f} dB over {len(values)} seeds")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"case": args.case, "suppression_db": values,
                       "median": float(np.median(values))}, fh, indent=2)


if __name__ == "__main__":
    main()
