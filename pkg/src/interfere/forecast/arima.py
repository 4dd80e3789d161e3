"""ARIMA(p, d, 0) fitted by ordinary least squares.

The training series is differenced ``d`` times and an AR(p) model with
intercept is fitted to the differences. A one-step forecast predicts the
next difference from the last ``p`` differences and integrates it back
against the last observed value. Rank-deficient designs (a constant
difference sequence, for instance) take the minimum-norm solution, which
still reproduces every in-sample target exactly when one exists.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigError, FitError, InputError


@dataclass
class ArimaConfig:
    p: int = 30
    d: int = 1
    q: int = 0

    def validate(self):
        if self.q != 0:
            raise ConfigError("only q = 0 (no moving-average terms) is supported")
        if self.d not in (0, 1):
            raise ConfigError("d must be 0 or 1")
        if self.p < 1:
            raise ConfigError("p must be at least 1")
        return self

    @property
    def window(self) -> int:
        # p lagged differences need p + d raw samples
        return self.p + self.d


def _lagged_design(windows, cfg):
    z = np.diff(windows, n=cfg.d, axis=1) if cfg.d else windows
    return np.column_stack([np.ones(len(z)), z[:, -cfg.p:]])


class ArimaModel:
    kind = "arima"

    def __init__(self, cfg: ArimaConfig, coef=None):
        self.cfg = cfg
        self.window = cfg.window
        self.coef = None if coef is None else np.asarray(coef, dtype=float)

    @property
    def intercept(self):
        return self.coef[0]

    @property
    def ar(self):
        """AR coefficients, lag 1 first."""
        return self.coef[1:][::-1]

    def fit_windows(self, windows, targets):
        windows = np.asarray(windows, dtype=float)
        targets = np.asarray(targets, dtype=float)
        n_params = self.cfg.p + 1
        if len(targets) < n_params:
            raise FitError(
                f"{len(targets)} training rows cannot determine {n_params} AR "
                f"parameters; reduce p"
            )
        design = _lagged_design(windows, self.cfg)
        rhs = targets - windows[:, -1] if self.cfg.d else targets
        if not (np.all(np.isfinite(design)) and np.all(np.isfinite(rhs))):
            raise FitError("non-finite values in the training series")
        coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
        if not np.all(np.isfinite(coef)):
            raise FitError("least-squares solution is not finite; reduce p")
        self.coef = coef
        return self

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        step = _lagged_design(x, self.cfg) @ self.coef
        return step + x[:, -1] if self.cfg.d else step

    def to_dict(self):
        return {"config": asdict(self.cfg), "coef": self.coef.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(ArimaConfig(**d["config"]), d["coef"])


def fit_arima(series, cfg: ArimaConfig) -> ArimaModel:
    """Fit on an entire (training) series."""
    cfg.validate()
    x = np.asarray(series, dtype=float)
    if len(x) <= cfg.p + cfg.d + 5:
        raise InputError(f"training length {len(x)} must exceed p + d + 5 = {cfg.p + cfg.d + 5}")
    w = cfg.window
    windows = np.lib.stride_tricks.sliding_window_view(x, w)[:-1]
    return ArimaModel(cfg).fit_windows(windows, x[w:])
