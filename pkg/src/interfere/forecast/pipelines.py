"""Conventional and EMD-based one-step-ahead forecasting pipelines."""

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..emd import SiftConfig, decompose
from ..errors import ComponentError, ConfigError, InputError
from ..seeding import derive_seed
from .arima import ArimaConfig, ArimaModel
from .dataset import WindowDataset, build_dataset
from .lstm import LstmConfig, LstmModel
from .training import fit
from .transformer import TransformerConfig, TransformerModel

log = logging.getLogger(__name__)

PREDICTORS = {
    "transformer": (TransformerConfig, TransformerModel),
    "lstm": (LstmConfig, LstmModel),
    "arima": (ArimaConfig, ArimaModel),
}


@dataclass
class ForecastResult:
    predicted: np.ndarray
    actual: np.ndarray
    rmse: float
    pipeline: str
    predictor: str
    # positions of the predicted samples in the source series
    slot_indices: np.ndarray
    per_component_rmse: Optional[list] = None
    component_predictions: Optional[list] = field(default=None, repr=False)
    # trained model per component (one entry for the conventional pipeline)
    models: Optional[list] = field(default=None, repr=False)

    def to_dict(self):
        return {
            "pipeline": self.pipeline,
            "predictor": self.predictor,
            "rmse": self.rmse,
            "n_slots": int(len(self.predicted)),
            "per_component_rmse": self.per_component_rmse,
        }


def rmse(predicted, actual) -> float:
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.size == 0:
        raise InputError("rmse needs two non-empty sequences of equal length")
    return float(np.sqrt(np.mean((p - a) ** 2)))


def predictor_config(kind, values=None):
    """Build and validate the config dataclass of a predictor kind."""
    try:
        cls = PREDICTORS[kind][0]
    except KeyError:
        raise ConfigError(f"unknown predictor kind {kind!r}; choose from {sorted(PREDICTORS)}")
    if isinstance(values, cls):
        return values.validate()
    try:
        return cls(**(values or {})).validate()
    except TypeError as exc:
        raise ConfigError(f"bad {kind} config: {exc}") from exc


def _window(cfg):
    return cfg.window


def train_predictor(ds: WindowDataset, cfg):
    """Fit a predictor on the normalized training rows of ``ds``."""
    cfg.validate()
    if _window(cfg) != ds.window:
        raise ConfigError(f"dataset window {ds.window} does not match predictor window {_window(cfg)}")
    x, y = ds.train_arrays()
    if isinstance(cfg, ArimaConfig):
        return ArimaModel(cfg).fit_windows(x, y)
    model_cls = TransformerModel if isinstance(cfg, TransformerConfig) else LstmModel
    model = model_cls(cfg)
    return fit(model, x, y, cfg.epochs, cfg.learning_rate, cfg.batch_size,
               derive_seed(cfg.seed, "minibatches"))


def train_transformer(ds, cfg: TransformerConfig):
    return train_predictor(ds, cfg)


def train_lstm(ds, cfg: LstmConfig):
    return train_predictor(ds, cfg)


def rolling_forecast(model, ds: WindowDataset, pipeline="conventional") -> ForecastResult:
    """Teacher-forced one-step-ahead predictions over the validation rows."""
    if model.window != ds.window:
        raise ConfigError(f"model window {model.window} does not match dataset window {ds.window}")
    x, _ = ds.validation_arrays()
    predicted = ds.normalizer.denormalize(model.predict(x))
    actual = ds.targets[ds.split_index:].copy()
    return ForecastResult(predicted, actual, rmse(predicted, actual), pipeline,
                          getattr(model, "kind", "custom"), ds.validation_indices,
                          models=[(model, ds.normalizer)])


def forecast_conventional(series, cfg) -> ForecastResult:
    ds = build_dataset(series, _window(cfg))
    return rolling_forecast(train_predictor(ds, cfg), ds, "conventional")


def component_config(cfg, index):
    """Config for decomposed component ``index`` with its own derived seed."""
    if isinstance(cfg, ArimaConfig):
        return cfg
    return dataclasses.replace(cfg, seed=derive_seed(cfg.seed, f"component-{index}"))


def _forecast_component(args):
    index, component, cfg = args
    try:
        return forecast_conventional(component, component_config(cfg, index))
    except Exception as exc:
        raise ComponentError(index, exc) from exc


def forecast_proposed(series, cfg, sift: Optional[SiftConfig] = None, workers: int = 1,
                      decomposition=None) -> ForecastResult:
    """Decompose, forecast each IMF and the residual separately, sum the forecasts.

    The decomposition covers the whole series, validation span included.
    """
    x = np.asarray(series, dtype=float)
    dec = decomposition if decomposition is not None else decompose(x, sift or SiftConfig())
    components = list(dec.imfs) + [dec.residual]
    jobs = [(k, c, cfg) for k, c in enumerate(components)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_forecast_component, jobs))
    else:
        parts = [_forecast_component(j) for j in jobs]
    for k, part in enumerate(parts):
        log.info("component %d/%d rmse %.4g", k + 1, len(parts), part.rmse)

    predicted = np.sum([p.predicted for p in parts], axis=0)
    ds_window = _window(cfg)
    actual = x[ds_window:][build_dataset(x, ds_window).split_index:]
    return ForecastResult(predicted, actual, rmse(predicted, actual), "proposed",
                          parts[0].predictor, parts[0].slot_indices,
                          per_component_rmse=[p.rmse for p in parts],
                          component_predictions=[p.predicted for p in parts],
                          models=[m for p in parts for m in p.models])


def run_forecast(series, cfg, pipeline="conventional", sift=None, workers=1):
    if pipeline == "conventional":
        return forecast_conventional(series, cfg)
    if pipeline == "proposed":
        return forecast_proposed(series, cfg, sift, workers)
    raise ConfigError(f"unknown pipeline {pipeline!r}")
