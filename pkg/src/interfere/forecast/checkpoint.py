"""JSON checkpoints for trained predictors.

Layout::

    {"format": "interfere-checkpoint", "version": 1, "pipeline": ...,
     "components": [{"model": {"kind": ..., "config": ..., "params"|"coef": ...},
                     "normalizer": {"mean": ..., "std": ...}}, ...]}

Floats are written with ``repr`` precision by the json module, so a
reload predicts bit-identically.
"""

import json

from ..errors import ConfigError
from .arima import ArimaModel
from .dataset import Normalizer
from .lstm import LstmModel
from .transformer import TransformerModel

FORMAT = "interfere-checkpoint"
VERSION = 1
MODEL_TYPES = {"transformer": TransformerModel, "lstm": LstmModel, "arima": ArimaModel}


def to_document(models, pipeline):
    return {
        "format": FORMAT,
        "version": VERSION,
        "pipeline": pipeline,
        "components": [
            {"model": {"kind": m.kind, **m.to_dict()},
             "normalizer": {"mean": n.mean, "std": n.std}}
            for m, n in models
        ],
    }


def from_document(doc):
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise ConfigError(f"not a version-{VERSION} {FORMAT} document")
    out = []
    for comp in doc["components"]:
        m = dict(comp["model"])
        kind = m.pop("kind")
        if kind not in MODEL_TYPES:
            raise ConfigError(f"unknown model kind {kind!r} in checkpoint")
        out.append((MODEL_TYPES[kind].from_dict(m), Normalizer(**comp["normalizer"])))
    return doc["pipeline"], out


def save(path, models, pipeline):
    with open(path, "w") as fh:
        json.dump(to_document(models, pipeline), fh, sort_keys=True)
        fh.write("\n")


def load(path):
    with open(path) as fh:
        return from_document(json.load(fh))
