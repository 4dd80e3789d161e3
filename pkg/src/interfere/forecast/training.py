import logging

import numpy as np

from ..errors import DivergenceError
from .optim import Adam, iterate_minibatches

log = logging.getLogger(__name__)


def fit(model, x, y, epochs, learning_rate, batch_size, seed):
    """Minibatch Adam on MSE; records the mean loss of every epoch on the model.

    ``model`` exposes ``flat`` (parameter buffer) and ``loss_and_grads``
    returning the loss and a gradient buffer of the same layout.
    """
    rng = np.random.default_rng(seed)
    opt = Adam(model.flat, learning_rate=learning_rate)
    model.epoch_losses = []
    for epoch in range(1, epochs + 1):
        total = 0.0
        for idx in iterate_minibatches(rng, len(y), batch_size):
            loss, grad = model.loss_and_grads(x[idx], y[idx], rng)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise DivergenceError(epoch, learning_rate)
            opt.step(grad)
            total += loss * len(idx)
        model.epoch_losses.append(total / len(y))
        log.debug("%s epoch %d loss %.6g", model.kind, epoch, model.epoch_losses[-1])
    return model
