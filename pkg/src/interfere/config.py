"""Versioned JSON experiment configuration.

Every sub-seed comes from ``global_seed`` through :func:`derive_seed`:
the scenario uses label ``"scenario"``, the predictor ``"predictor"``.
"""

import copy
import json
from dataclasses import dataclass, field, fields

from .allocation import DEFAULT_ALPHA, DEFAULT_PAYLOAD_BITS, DEFAULT_TARGETS, MA_INDEX
from .channel import LinkConfig, ScenarioConfig
from .emd import SiftConfig
from .errors import ConfigError
from .forecast.pipelines import PREDICTORS, predictor_config
from .seeding import derive_seed

SCHEMA_VERSION = 1
PIPELINES = ("conventional", "proposed")
ESTIMATORS = ("genie", "ma", "predictor")
SCALES = ("db", "linear")

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "global_seed": 0,
    "scenario": {
        "desired": {"mean_power_db": 20.0, "doppler_ts": 0.01, "symbol_source": "qpsk"},
        "interferers": [
            {"mean_power_db": g, "doppler_ts": 0.01, "symbol_source": "qpsk"}
            for g in (5.0, 2.0, 0.0, -3.0, -10.0, 1.0)
        ],
        "noise_power": 1.0,
        "trace_length": 200,
    },
    "predictor": {
        "kind": "transformer",
        "window": 10, "blocks": 16, "head_size": 32, "heads": 16, "ff_dim": 4,
        "dropout": 0.2, "epochs": 100, "learning_rate": 0.001, "batch_size": 16,
        "table2_literal": False,
    },
    "pipeline": "proposed",
    "scale": "db",
    "sift": {"max_imfs": 10, "max_sift_iterations": 100, "sd_threshold": 0.2,
             "boundary_policy": "mirror"},
    "allocation": {
        "targets": list(DEFAULT_TARGETS),
        "payload_bits": DEFAULT_PAYLOAD_BITS,
        "estimators": list(ESTIMATORS),
        "alpha": DEFAULT_ALPHA,
        "ma_index": "printed",
    },
    "output_dir": None,
}


@dataclass
class AllocationSettings:
    targets: list = field(default_factory=lambda: list(DEFAULT_TARGETS))
    payload_bits: int = DEFAULT_PAYLOAD_BITS
    estimators: list = field(default_factory=lambda: list(ESTIMATORS))
    alpha: float = DEFAULT_ALPHA
    ma_index: str = "printed"

    def validate(self):
        if not self.targets or list(self.targets) != sorted(self.targets, reverse=True):
            raise ConfigError("allocation targets must be a non-empty list sorted descending")
        if any(not 0 < t < 0.5 for t in self.targets):
            raise ConfigError("allocation targets must lie in (0, 0.5)")
        if int(self.payload_bits) != self.payload_bits or self.payload_bits < 1:
            raise ConfigError("payload_bits must be an integer >= 1")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ConfigError(f"unknown estimators {sorted(unknown)}; choose from {list(ESTIMATORS)}")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.ma_index not in MA_INDEX:
            raise ConfigError(f"ma_index must be one of {list(MA_INDEX)}")
        return self


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig
    predictor: object
    pipeline: str
    sift: SiftConfig
    allocation: AllocationSettings
    scale: str = "db"
    output_dir: str = None
    global_seed: int = 0

    @property
    def predictor_kind(self):
        return next(k for k, (cls, _) in PREDICTORS.items() if isinstance(self.predictor, cls))


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _build(cls, values, where):
    if not isinstance(values, dict):
        raise ConfigError(f"{where} must be a JSON object")
    names = {f.name for f in fields(cls)}
    extra = set(values) - names
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"bad {where}: {exc}") from exc


def parse_config(doc=None) -> ExperimentConfig:
    """Validate a config document layered over the defaults.

    A predictor block naming a different ``kind`` replaces the default
    transformer block instead of being merged into it.
    """
    doc = doc or {}
    base = DEFAULTS
    user_pred = doc.get("predictor")
    if isinstance(user_pred, dict) and user_pred.get("kind", "transformer") != "transformer":
        base = {**DEFAULTS, "predictor": {}}
    doc = _merge(base, doc)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {doc.get('schema_version')!r}; "
                          f"expected {SCHEMA_VERSION}")
    extra = set(doc) - set(DEFAULTS)
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    seed = doc["global_seed"]
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError("global_seed must be a non-negative integer below 2**64")

    sc = dict(doc["scenario"])
    if "rng_seed" in sc:
        raise ConfigError("scenario.rng_seed is derived from global_seed; do not set it")
    sc["desired"] = _build(LinkConfig, sc.get("desired", {}), "scenario.desired")
    if not isinstance(sc.get("interferers"), list):
        raise ConfigError("scenario.interferers must be a list")
    sc["interferers"] = [_build(LinkConfig, d, f"scenario.interferers[{i}]")
                         for i, d in enumerate(sc["interferers"])]
    if not sc["interferers"]:
        raise ConfigError("scenario.interferers must not be empty")
    scenario = _build(ScenarioConfig, {**sc, "rng_seed": derive_seed(seed, "scenario")}, "scenario")
    scenario.validate()

    pred = dict(doc["predictor"])
    kind = pred.pop("kind", None)
    if kind not in PREDICTORS:
        raise ConfigError(f"predictor.kind must be one of {sorted(PREDICTORS)}")
    if "seed" in pred:
        raise ConfigError("predictor.seed is derived from global_seed; do not set it")
    if kind != "arima":
        pred["seed"] = derive_seed(seed, "predictor")
    predictor = predictor_config(kind, pred)

    pipeline = doc["pipeline"]
    if pipeline not in PIPELINES:
        raise ConfigError(f"pipeline must be one of {list(PIPELINES)}")
    if doc["scale"] not in SCALES:
        raise ConfigError(f"scale must be one of {list(SCALES)}")
    sift = _build(SiftConfig, doc["sift"], "sift").validate()
    alloc = _build(AllocationSettings, doc["allocation"], "allocation").validate()
    return ExperimentConfig(scenario, predictor, pipeline, sift, alloc, doc["scale"],
                            doc["output_dir"], seed)


def load_config(path=None, overrides=None) -> ExperimentConfig:
    doc = {}
    if path is not None:
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(_merge(doc, overrides or {}))
