import numpy as np


def flat_views(arrays):
    """Copy named arrays into one contiguous buffer.

    Returns ``(flat, views)`` where ``views[name]`` is a reshaped slice of
    ``flat``; writing to a view writes to the buffer.
    """
    total = sum(int(np.prod(a.shape)) for a in arrays.values())
    flat = np.zeros(total)
    views = {}
    offset = 0
    for name, a in arrays.items():
        n = int(np.prod(a.shape))
        view = flat[offset:offset + n].reshape(a.shape)
        view[...] = a
        views[name] = view
        offset += n
    return flat, views


class Adam:
    """Adam on one flat parameter vector, updated in place."""

    def __init__(self, params, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros_like(params)
        self.v = np.zeros_like(params)
        self.t = 0

    def step(self, grad):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        self.m *= b1
        self.m += (1 - b1) * grad
        self.v *= b2
        self.v += (1 - b2) * grad * grad
        m_hat = self.m / (1 - b1 ** self.t)
        v_hat = self.v / (1 - b2 ** self.t)
        self.params -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def glorot_uniform(rng, fan_in, fan_out, shape=None):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


def iterate_minibatches(rng, n, batch_size):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]
