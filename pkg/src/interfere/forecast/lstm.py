"""Stacked LSTM regressor trained with backpropagation through time.

Every recurrent layer hands its full hidden sequence to the next; the last
layer's final hidden state feeds ``Dense(8, relu) -> Dense(1)``.
Gate order in the fused weight matrices is ``[input, forget, cell, output]``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit

from ..errors import ConfigError
from .optim import flat_views, glorot_uniform

FORGET_BIAS = 1.0


@dataclass
class LstmConfig:
    window: int = 30
    layer_sizes: list = field(default_factory=lambda: [16, 16, 16])
    dense_sizes: list = field(default_factory=lambda: [8, 1])
    epochs: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 16
    seed: int = 0

    def validate(self):
        if not self.layer_sizes or min(self.layer_sizes) < 1:
            raise ConfigError("lstm layer_sizes must be a non-empty list of positive sizes")
        if not self.dense_sizes or min(self.dense_sizes) < 1 or self.dense_sizes[-1] != 1:
            raise ConfigError("lstm dense_sizes must be positive and end with 1")
        for name in ("window", "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"lstm {name} must be positive")
        if not self.learning_rate > 0:
            raise ConfigError("lstm learning_rate must be positive")
        return self


@njit(cache=True, error_model="numpy")
def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@njit(cache=True, error_model="numpy")
def _layer_forward(zx, wh, batch, steps, units):
    """zx: (batch, steps, 4u) input contributions incl. bias."""
    hs = np.zeros((batch, steps + 1, units))
    cs = np.zeros((batch, steps + 1, units))
    gates = np.empty((batch, steps, 4 * units))
    for t in range(steps):
        z = zx[:, t, :] + np.ascontiguousarray(hs[:, t, :]) @ wh
        for b in range(batch):
            for u in range(units):
                ig = _sigmoid(z[b, u])
                fg = _sigmoid(z[b, units + u])
                gg = np.tanh(z[b, 2 * units + u])
                og = _sigmoid(z[b, 3 * units + u])
                c = fg * cs[b, t, u] + ig * gg
                cs[b, t + 1, u] = c
                hs[b, t + 1, u] = og * np.tanh(c)
                gates[b, t, u] = ig
                gates[b, t, units + u] = fg
                gates[b, t, 2 * units + u] = gg
                gates[b, t, 3 * units + u] = og
    return hs, cs, gates


@njit(cache=True, error_model="numpy")
def _layer_backward(dhs, hs, cs, gates, wh, batch, steps, units):
    """dhs: (batch, steps, u) gradient w.r.t. each emitted hidden state.

    Returns dz (batch, steps, 4u) and dWh.
    """
    dz = np.empty((batch, steps, 4 * units))
    dwh = np.zeros((units, 4 * units))
    dh_next = np.zeros((batch, units))
    dc_next = np.zeros((batch, units))
    wht = np.ascontiguousarray(wh.T)
    for t in range(steps - 1, -1, -1):
        for b in range(batch):
            for u in range(units):
                ig = gates[b, t, u]
                fg = gates[b, t, units + u]
                gg = gates[b, t, 2 * units + u]
                og = gates[b, t, 3 * units + u]
                tc = np.tanh(cs[b, t + 1, u])
                dh = dhs[b, t, u] + dh_next[b, u]
                dc = dh * og * (1.0 - tc * tc) + dc_next[b, u]
                dz[b, t, u] = dc * gg * ig * (1.0 - ig)
                dz[b, t, units + u] = dc * cs[b, t, u] * fg * (1.0 - fg)
                dz[b, t, 2 * units + u] = dc * ig * (1.0 - gg * gg)
                dz[b, t, 3 * units + u] = dh * tc * og * (1.0 - og)
                dc_next[b, u] = dc * fg
        dzt = np.ascontiguousarray(dz[:, t, :])
        dwh += np.ascontiguousarray(hs[:, t, :].T) @ dzt
        dh_next = dzt @ wht
    return dz, dwh


class LstmModel:
    kind = "lstm"

    def __init__(self, cfg: LstmConfig, params=None):
        self.cfg = cfg
        self.window = cfg.window
        init = params if params is not None else self._init_params()
        self.flat, self.params = flat_views(init)
        self.grad_flat, self.grads = flat_views(init)
        self.epoch_losses = []

    def _init_params(self):
        rng = np.random.default_rng(self.cfg.seed)
        p = {}
        fan_in = 1
        for l, u in enumerate(self.cfg.layer_sizes):
            p[f"l{l}.wx"] = glorot_uniform(rng, fan_in, 4 * u)
            p[f"l{l}.wh"] = glorot_uniform(rng, u, 4 * u)
            b = np.zeros(4 * u)
            b[u:2 * u] = FORGET_BIAS
            p[f"l{l}.b"] = b
            fan_in = u
        for l, u in enumerate(self.cfg.dense_sizes):
            p[f"d{l}.w"] = glorot_uniform(rng, fan_in, u)
            p[f"d{l}.b"] = np.zeros(u)
            fan_in = u
        return p

    def forward(self, x, rng=None):
        p = self.params
        x = np.asarray(x, dtype=float)
        b, t = x.shape
        seq = x[:, :, None]
        layers = []
        for l, u in enumerate(self.cfg.layer_sizes):
            zx = (seq.reshape(b * t, -1) @ p[f"l{l}.wx"] + p[f"l{l}.b"]).reshape(b, t, 4 * u)
            hs, cs, gates = _layer_forward(zx, p[f"l{l}.wh"], b, t, u)
            layers.append((seq, hs, cs, gates))
            seq = hs[:, 1:, :]
        a = seq[:, -1, :]
        dense = []
        n_dense = len(self.cfg.dense_sizes)
        for l in range(n_dense):
            pre = a @ p[f"d{l}.w"] + p[f"d{l}.b"]
            dense.append((a, pre))
            a = pre if l == n_dense - 1 else np.maximum(pre, 0.0)
        return a[:, 0], (layers, dense)

    def predict(self, x):
        return self.forward(x)[0]

    def backward(self, dout, cache):
        p, g = self.params, self.grads
        layers, dense = cache
        da = dout[:, None]
        for l in reversed(range(len(dense))):
            a_in, pre = dense[l]
            if l != len(dense) - 1:
                da = da * (pre > 0)
            g[f"d{l}.w"][:] = a_in.T @ da
            g[f"d{l}.b"][:] = da.sum(axis=0)
            da = da @ p[f"d{l}.w"].T
        b, t = layers[0][0].shape[:2]
        dseq = np.zeros((b, t, self.cfg.layer_sizes[-1]))
        dseq[:, -1, :] = da
        for l in reversed(range(len(layers))):
            u = self.cfg.layer_sizes[l]
            seq, hs, cs, gates = layers[l]
            dz, dwh = _layer_backward(dseq, hs, cs, gates, p[f"l{l}.wh"], b, t, u)
            dz2 = dz.reshape(b * t, 4 * u)
            g[f"l{l}.wh"][:] = dwh
            g[f"l{l}.wx"][:] = seq.reshape(b * t, -1).T @ dz2
            g[f"l{l}.b"][:] = dz2.sum(axis=0)
            dseq = (dz2 @ p[f"l{l}.wx"].T).reshape(b, t, -1)
        return self.grad_flat

    def loss_and_grads(self, x, y, rng=None):
        pred, cache = self.forward(x)
        err = pred - y
        loss = float(np.mean(err ** 2))
        return loss, self.backward(2.0 * err / len(err), cache)

    def to_dict(self):
        return {"config": asdict(self.cfg),
                "params": {k: v.tolist() for k, v in self.params.items()}}

    @classmethod
    def from_dict(cls, d):
        cfg = LstmConfig(**d["config"])
        return cls(cfg, {k: np.asarray(v, dtype=float) for k, v in d["params"].items()})
