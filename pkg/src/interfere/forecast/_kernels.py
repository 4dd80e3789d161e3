"""Compiled forward/backward kernels for one post-norm encoder block.

Activations are (batch * time, width) row-major matrices. Projection
columns are head-interleaved: column ``c * heads + h`` is coordinate ``c``
of head ``h``, so the innermost loops run over heads on contiguous memory.
Gradient outputs
are written into caller-provided arrays so they can be views into one flat
gradient buffer.
"""

import numpy as np
from numba import njit

LN_EPS = 1e-6
# fast-math without the no-nan/no-inf assumptions; divergence must stay detectable
_FAST = {"reassoc", "contract", "arcp", "nsz"}


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def _layer_norm(u, gamma, beta):
    n, d = u.shape
    out = np.empty_like(u)
    xhat = np.empty_like(u)
    inv = np.empty(n)
    for r in range(n):
        mu = 0.0
        for c in range(d):
            mu += u[r, c]
        mu /= d
        var = 0.0
        for c in range(d):
            t = u[r, c] - mu
            var += t * t
        iv = 1.0 / np.sqrt(var / d + LN_EPS)
        inv[r] = iv
        for c in range(d):
            xh = (u[r, c] - mu) * iv
            xhat[r, c] = xh
            out[r, c] = gamma[c] * xh + beta[c]
    return out, xhat, inv


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def _layer_norm_backward(dz, gamma, xhat, inv, dgamma, dbeta):
    n, d = dz.shape
    du = np.empty_like(dz)
    dgamma[:] = 0.0
    dbeta[:] = 0.0
    for r in range(n):
        m1 = 0.0
        m2 = 0.0
        for c in range(d):
            dx = dz[r, c] * gamma[c]
            m1 += dx
            m2 += dx * xhat[r, c]
            dgamma[c] += dz[r, c] * xhat[r, c]
            dbeta[c] += dz[r, c]
        m1 /= d
        m2 /= d
        for c in range(d):
            du[r, c] = inv[r] * (dz[r, c] * gamma[c] - m1 - xhat[r, c] * m2)
    return du


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def _col_sum(a, out):
    out[:] = 0.0
    for r in range(a.shape[0]):
        for c in range(a.shape[1]):
            out[c] += a[r, c]


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def attention_logits(h, wq, bq, wk, bk, wv, bv, batch, steps, heads, hdim):
    """Projections and row-max-shifted attention logits of shape (batch, T, T, heads).

    The caller exponentiates the logits in place (vectorized numpy exp is
    several times faster than a scalar loop) and passes them on to
    ``block_forward``.
    """
    scale = 1.0 / np.sqrt(hdim)
    q = h @ wq + bq
    k = h @ wk + bk
    v = h @ wv + bv
    s = np.zeros((batch, steps, steps, heads))
    mx = np.empty(heads)
    for b in range(batch):
        base = b * steps
        for i in range(steps):
            ri = base + i
            for j in range(steps):
                rj = base + j
                for c in range(hdim):
                    col = c * heads
                    for hh in range(heads):
                        s[b, i, j, hh] += q[ri, col + hh] * k[rj, col + hh]
            mx[:] = -np.inf
            for j in range(steps):
                for hh in range(heads):
                    s[b, i, j, hh] *= scale
                    mx[hh] = max(mx[hh], s[b, i, j, hh])
            for j in range(steps):
                for hh in range(heads):
                    s[b, i, j, hh] -= mx[hh]
    return q, k, v, s


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def block_forward(h, v, att, wo, bo, g1, be1, w1, b1, w2, b2, g2, be2,
                  m1, m2, batch, steps, heads, hdim):
    """Rest of the block; ``att`` holds exponentiated logits, normalized here in place."""
    o = np.zeros((h.shape[0], heads * hdim))
    tot = np.empty(heads)
    for b in range(batch):
        base = b * steps
        for i in range(steps):
            ri = base + i
            tot[:] = 0.0
            for j in range(steps):
                for hh in range(heads):
                    tot[hh] += att[b, i, j, hh]
            for j in range(steps):
                rj = base + j
                for hh in range(heads):
                    att[b, i, j, hh] /= tot[hh]
                for c in range(hdim):
                    col = c * heads
                    for hh in range(heads):
                        o[ri, col + hh] += att[b, i, j, hh] * v[rj, col + hh]
    a = (o @ wo + bo) * m1
    y, xhat1, inv1 = _layer_norm(h + a, g1, be1)
    hidden = y @ w1 + b1
    relu = np.maximum(hidden, 0.0)
    ff = (relu @ w2 + b2) * m2
    z, xhat2, inv2 = _layer_norm(y + ff, g2, be2)
    return z, o, xhat1, inv1, y, hidden, relu, xhat2, inv2


@njit(cache=True, fastmath=_FAST, error_model="numpy")
def block_backward(dz, h, q, k, v, att, o, xhat1, inv1, y, hidden, relu, xhat2, inv2,
                   wq, wk, wv, wo, g1, w1, w2, g2, m1, m2, batch, steps, heads, hdim,
                   gwq, gbq, gwk, gbk, gwv, gbv, gwo, gbo, gg1, gbe1,
                   gw1, gb1, gw2, gb2, gg2, gbe2):
    scale = 1.0 / np.sqrt(hdim)
    dv2 = _layer_norm_backward(dz, g2, xhat2, inv2, gg2, gbe2)
    dff = dv2 * m2
    gw2[:, :] = np.ascontiguousarray(relu.T) @ dff
    _col_sum(dff, gb2)
    dhidden = (dff @ np.ascontiguousarray(w2.T)) * (hidden > 0)
    gw1[:, :] = np.ascontiguousarray(y.T) @ dhidden
    _col_sum(dhidden, gb1)
    dy = dv2 + dhidden @ np.ascontiguousarray(w1.T)

    du = _layer_norm_backward(dy, g1, xhat1, inv1, gg1, gbe1)
    da = du * m1
    gwo[:, :] = np.ascontiguousarray(o.T) @ da
    _col_sum(da, gbo)
    do = da @ np.ascontiguousarray(wo.T)

    dq = np.zeros_like(q)
    dk = np.zeros_like(k)
    dv = np.zeros_like(v)
    ds = np.empty((steps, heads))
    dot = np.empty(heads)
    for b in range(batch):
        base = b * steps
        for i in range(steps):
            ri = base + i
            ds[:, :] = 0.0
            dot[:] = 0.0
            for j in range(steps):
                rj = base + j
                for c in range(hdim):
                    col = c * heads
                    for hh in range(heads):
                        ds[j, hh] += do[ri, col + hh] * v[rj, col + hh]
                for hh in range(heads):
                    dot[hh] += ds[j, hh] * att[b, i, j, hh]
            for j in range(steps):
                for hh in range(heads):
                    ds[j, hh] = att[b, i, j, hh] * (ds[j, hh] - dot[hh]) * scale
            for j in range(steps):
                rj = base + j
                for c in range(hdim):
                    col = c * heads
                    for hh in range(heads):
                        dv[rj, col + hh] += att[b, i, j, hh] * do[ri, col + hh]
                        dq[ri, col + hh] += ds[j, hh] * k[rj, col + hh]
                        dk[rj, col + hh] += ds[j, hh] * q[ri, col + hh]
    ht = np.ascontiguousarray(h.T)
    gwq[:, :] = ht @ dq
    gwk[:, :] = ht @ dk
    gwv[:, :] = ht @ dv
    _col_sum(dq, gbq)
    _col_sum(dk, gbk)
    _col_sum(dv, gbv)
    return (du + dq @ np.ascontiguousarray(wq.T) + dk @ np.ascontiguousarray(wk.T)
            + dv @ np.ascontiguousarray(wv.T))
