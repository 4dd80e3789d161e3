"""Central finite-difference check of a model's analytic gradients."""

import numpy as np


def relative_error(analytic, numeric, floor=1e-5):
    """``||a - n|| / max(||a||, ||n||, floor)``.

    The floor keeps parameter groups whose true gradient is exactly zero
    (the key bias under softmax, for one) from dividing round-off by
    round-off.
    """
    a = np.ravel(analytic)
    n = np.ravel(numeric)
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), floor))


def numeric_gradient(model, x, y, h=1e-5, min_step=1e-9):
    """Central differences, shrinking the step where the loss has a kink.

    A ReLU pre-activation within ``h`` of zero makes the central difference
    average two different slopes. That shows up as disagreeing one-sided
    differences, and the step is cut tenfold until they agree or reach
    ``min_step``.
    """
    base, _ = model.loss_and_grads(x, y)
    num = np.zeros_like(model.flat)
    for i in range(len(model.flat)):
        old = model.flat[i]
        step = h
        while True:
            model.flat[i] = old + step
            plus, _ = model.loss_and_grads(x, y)
            model.flat[i] = old - step
            minus, _ = model.loss_and_grads(x, y)
            model.flat[i] = old
            fwd, bwd = (plus - base) / step, (base - minus) / step
            if step / 10 < min_step or abs(fwd - bwd) <= 1e-4 * max(abs(fwd), abs(bwd)) + 1e-6:
                break
            step /= 10
        num[i] = (plus - minus) / (2 * step)
    return num


def gradient_check(model, x, y, h=1e-5):
    """Relative error per parameter group (dropout off, float64)."""
    _, grad = model.loss_and_grads(x, y)
    analytic = grad.copy()
    numeric = numeric_gradient(model, x, y, h)
    out, offset = {}, 0
    for name, view in model.params.items():
        n = view.size
        out[name] = relative_error(analytic[offset:offset + n], numeric[offset:offset + n])
        offset += n
    return out
