"""Pure-NumPy kernels. Same signatures and semantics as the compiled module.

Array conventions: time-major recurrent buffers ``(T, B, ...)``, float64,
C-contiguous. Gate blocks in the ``4H`` axis are ordered input, forget,
candidate, output.
"""
from functools import lru_cache

import numpy as np


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_forward(xw, w_hh, h0, c0):
    T, B, G = xw.shape
    H = G // 4
    hs = np.empty((T, B, H))
    cs = np.empty((T, B, H))
    acts = np.empty((T, B, G))
    h, c = h0, c0
    for t in range(T):
        z = xw[t] + h @ w_hh
        a = acts[t]
        a[:, :2 * H] = _sigmoid(z[:, :2 * H])
        a[:, 2 * H:3 * H] = np.tanh(z[:, 2 * H:3 * H])
        a[:, 3 * H:] = _sigmoid(z[:, 3 * H:])
        c = a[:, H:2 * H] * c + a[:, :H] * a[:, 2 * H:3 * H]
        h = a[:, 3 * H:] * np.tanh(c)
        cs[t] = c
        hs[t] = h
    return hs, cs, acts


def lstm_backward(dhs, acts, cs, hs, h0, c0, w_hh):
    T, B, H = dhs.shape
    dxw = np.empty((T, B, 4 * H))
    dw_hh = np.zeros_like(w_hh)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        a = acts[t]
        i, f, g, o = a[:, :H], a[:, H:2 * H], a[:, 2 * H:3 * H], a[:, 3 * H:]
        c_prev = cs[t - 1] if t > 0 else c0
        h_prev = hs[t - 1] if t > 0 else h0
        tc = np.tanh(cs[t])
        dh = dhs[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = dxw[t]
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H:2 * H] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * H:3 * H] = dc * i * (1.0 - g * g)
        dz[:, 3 * H:] = dh * tc * o * (1.0 - o)
        dw_hh += h_prev.T @ dz
        dh_next = dz @ w_hh.T
        dc_next = dc * f
    return dxw, dw_hh, dh_next, dc_next


def reflect_index(j, n):
    """Half-sample symmetric reflection of index ``j`` into ``[0, n)``."""
    period = 2 * n
    j = j % period
    return np.where(j >= n, period - 1 - j, j)


@lru_cache(maxsize=512)
def _smoothing_matrix(n, weights):
    radius = (len(weights) - 1) // 2
    w = np.asarray(weights)
    rows = np.repeat(np.arange(n), 2 * radius + 1)
    cols = reflect_index(np.arange(n)[:, None] + np.arange(-radius, radius + 1)[None, :], n).ravel()
    m = np.zeros((n, n))
    np.add.at(m, (rows, cols), np.tile(w, n))
    m.setflags(write=False)
    return m


def _by_length(lengths):
    groups = {}
    for b, n in enumerate(lengths.tolist()):
        groups.setdefault(n, []).append(b)
    return groups


def gaussian_forward(x, lengths, weights):
    y = np.zeros_like(x)
    key = tuple(weights.tolist())
    for n, rows in _by_length(lengths).items():
        if n == 0:
            continue
        m = _smoothing_matrix(n, key)
        y[rows, :n] = x[rows, :n] @ m.T
    return y


def gaussian_backward(dy, lengths, weights):
    dx = np.zeros_like(dy)
    key = tuple(weights.tolist())
    for n, rows in _by_length(lengths).items():
        if n == 0:
            continue
        m = _smoothing_matrix(n, key)
        dx[rows, :n] = dy[rows, :n] @ m
    return dx
