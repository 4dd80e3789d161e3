"""Encoder-only sequence-to-one transformer with hand-written backprop.

Each scalar timestep is projected to the model width, a sinusoidal
positional encoding is added, and the sequence passes through a stack of
post-norm encoder blocks::

    U = X + Dropout(MHA(X));   Y = LayerNorm(U)
    V = Y + Dropout(FFN(Y));   Z = LayerNorm(V)

The encoded sequence is averaged over time and mapped to one scalar.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigError
from . import _kernels
from .optim import flat_views, glorot_uniform

BLOCK_PARAMS = ("wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo", "ln1_g", "ln1_b",
                "w1", "b1", "w2", "b2", "ln2_g", "ln2_b")


@dataclass
class TransformerConfig:
    window: int = 10
    blocks: int = 16
    head_size: int = 32
    heads: int = 16
    ff_dim: int = 4
    dropout: float = 0.2
    epochs: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 16
    seed: int = 0
    # width = heads * head_size instead of width = head_size
    table2_literal: bool = False

    def validate(self):
        for name in ("window", "blocks", "head_size", "heads", "ff_dim",
                     "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"transformer {name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("transformer dropout must lie in [0, 1)")
        if not self.learning_rate > 0:
            raise ConfigError("transformer learning_rate must be positive")
        return self

    @property
    def model_width(self) -> int:
        return self.heads * self.head_size if self.table2_literal else self.head_size

    @property
    def head_dim(self) -> int:
        if self.table2_literal:
            return self.head_size
        return max(1, self.head_size // self.heads)


def positional_encoding(length, width):
    pos = np.arange(length)[:, None]
    i = np.arange(width)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / width)
    return np.where(i % 2 == 0, np.sin(angle), np.cos(angle))


class TransformerModel:
    kind = "transformer"

    def __init__(self, cfg: TransformerConfig, params=None):
        self.cfg = cfg
        self.window = cfg.window
        self.width = cfg.model_width
        self.n_heads = cfg.heads
        self.head_dim = cfg.head_dim
        self.pe = positional_encoding(cfg.window, self.width)
        init = params if params is not None else self._init_params()
        self.flat, self.params = flat_views(init)
        self.grad_flat, self.grads = flat_views(init)
        self.epoch_losses = []

    def _init_params(self):
        rng = np.random.default_rng(self.cfg.seed)
        d, hd, f = self.width, self.n_heads * self.head_dim, self.cfg.ff_dim
        p = {
            "in_w": glorot_uniform(rng, 1, d, shape=(d,)),
            "in_b": np.zeros(d),
        }
        for l in range(self.cfg.blocks):
            for name in ("q", "k", "v"):
                p[f"b{l}.w{name}"] = glorot_uniform(rng, d, hd)
                p[f"b{l}.b{name}"] = np.zeros(hd)
            p[f"b{l}.wo"] = glorot_uniform(rng, hd, d)
            p[f"b{l}.bo"] = np.zeros(d)
            p[f"b{l}.ln1_g"] = np.ones(d)
            p[f"b{l}.ln1_b"] = np.zeros(d)
            p[f"b{l}.w1"] = glorot_uniform(rng, d, f)
            p[f"b{l}.b1"] = np.zeros(f)
            p[f"b{l}.w2"] = glorot_uniform(rng, f, d)
            p[f"b{l}.b2"] = np.zeros(d)
            p[f"b{l}.ln2_g"] = np.ones(d)
            p[f"b{l}.ln2_b"] = np.zeros(d)
        p["out_w"] = glorot_uniform(rng, d, 1, shape=(d,))
        p["out_b"] = np.zeros(1)
        return p

    def _block(self, l, table):
        return [table[f"b{l}.{name}"] for name in BLOCK_PARAMS]

    def forward(self, x, rng=None):
        """Return predictions of shape (batch,) and the cache for backward.

        Dropout is active only when ``rng`` is given.
        """
        p = self.params
        x = np.asarray(x, dtype=float)
        b, t = x.shape
        n = b * t
        h = (x[:, :, None] * p["in_w"] + p["in_b"] + self.pe).reshape(n, self.width)
        rate = self.cfg.dropout
        if rng is not None and rate > 0.0:
            masks = (rng.random((self.cfg.blocks, 2, n, self.width)) >= rate) / (1.0 - rate)
        else:
            masks = np.ones((1, 2, n, self.width))
        caches = []
        for l in range(self.cfg.blocks):
            m = masks[min(l, len(masks) - 1)]
            (wq, bq, wk, bk, wv, bv, wo, bo, g1, be1,
             w1, b1, w2, b2, g2, be2) = self._block(l, p)
            q, k, v, att = _kernels.attention_logits(h, wq, bq, wk, bk, wv, bv,
                                                     b, t, self.n_heads, self.head_dim)
            np.exp(att, out=att)
            z, *rest = _kernels.block_forward(h, v, att, wo, bo, g1, be1, w1, b1, w2, b2,
                                              g2, be2, m[0], m[1],
                                              b, t, self.n_heads, self.head_dim)
            caches.append((h, m, q, k, v, att, *rest))
            h = z
        pooled = h.reshape(b, t, self.width).mean(axis=1)
        pred = pooled @ p["out_w"] + p["out_b"][0]
        return pred, (x, caches, pooled)

    def predict(self, x):
        return self.forward(x)[0]

    def backward(self, dout, cache):
        """Fill ``self.grad_flat`` with d(loss)/d(params) given d(loss)/d(pred)."""
        p, g = self.params, self.grads
        x, caches, pooled = cache
        b, t = x.shape
        g["out_w"][:] = pooled.T @ dout
        g["out_b"][0] = dout.sum()
        dh = np.repeat(np.outer(dout / t, p["out_w"]), t, axis=0)
        for l in reversed(range(self.cfg.blocks)):
            h, m, q, k, v, att, o, xhat1, inv1, y, hidden, relu, xhat2, inv2 = caches[l]
            pw = dict(zip(BLOCK_PARAMS, self._block(l, p)))
            dh = _kernels.block_backward(
                dh, h, q, k, v, att, o, xhat1, inv1, y, hidden, relu, xhat2, inv2,
                pw["wq"], pw["wk"], pw["wv"], pw["wo"], pw["ln1_g"], pw["w1"], pw["w2"],
                pw["ln2_g"], m[0], m[1], b, t, self.n_heads, self.head_dim,
                *self._block(l, g))
        dh = dh.reshape(b, t, self.width)
        g["in_w"][:] = np.einsum("bt,btd->d", x, dh)
        g["in_b"][:] = dh.sum(axis=(0, 1))
        return self.grad_flat

    def loss_and_grads(self, x, y, rng=None):
        pred, cache = self.forward(x, rng)
        err = pred - y
        loss = float(np.mean(err ** 2))
        return loss, self.backward(2.0 * err / len(err), cache)

    def to_dict(self):
        return {"config": asdict(self.cfg),
                "params": {k: v.tolist() for k, v in self.params.items()}}

    @classmethod
    def from_dict(cls, d):
        cfg = TransformerConfig(**d["config"])
        return cls(cfg, {k: np.asarray(v, dtype=float) for k, v in d["params"].items()})
