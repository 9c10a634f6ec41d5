"""Composite differentiable ops backed by the kernel layer."""
import math

import numpy as np

from .. import kernels
from ..errors import DimensionError, DomainError, VocabularyError
from .tensor import Tensor, _result, as_tensor, mul


def gaussian_kernel(sigma):
    """Normalized Gaussian taps on ``[-r, r]`` with ``r = ceil(3 * sigma)``."""
    if not sigma > 0 or not math.isfinite(sigma):
        raise DomainError(f"sigma must be a positive finite number, got {sigma!r}")
    radius = math.ceil(3.0 * sigma)
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (k / sigma) ** 2)
    return w / w.sum()


def gaussian_filter_1d(v, sigma, lengths=None, backend=None):
    """Smooth the last axis of ``v`` with a reflect-padded Gaussian.

    With ``lengths``, row ``b`` is filtered as a signal of length
    ``lengths[b]`` (reflection happens at that boundary) and entries past it
    are zero in the output.
    """
    v = as_tensor(v)
    weights = gaussian_kernel(sigma)
    if v.ndim not in (1, 2):
        raise DimensionError(f"gaussian_filter_1d expects 1-D or 2-D input, got {v.shape}")
    if v.shape[-1] < 1:
        raise DomainError("gaussian_filter_1d of an empty signal")
    x2 = v.data.reshape(-1, v.shape[-1])
    if lengths is None:
        lengths = np.full(x2.shape[0], x2.shape[1], dtype=np.int64)
    else:
        lengths = np.asarray(lengths, dtype=np.int64).reshape(-1)
        if lengths.shape[0] != x2.shape[0] or lengths.min() < 0 or lengths.max() > x2.shape[1]:
            raise DimensionError(f"lengths {lengths.tolist()} do not fit signal shape {v.shape}")
    out = kernels.gaussian_forward(x2, lengths, weights, backend=backend).reshape(v.shape)

    def _back(g):
        dx = kernels.gaussian_backward(g.reshape(x2.shape), lengths, weights, backend=backend)
        return (dx.reshape(v.shape),)

    return _result(out, (v,), _back)


def lstm(x, w_ih, w_hh, bias, h0=None, c0=None, backend=None):
    """Run a single-layer LSTM over ``x`` of shape ``(B, T, E)`` or ``(T, E)``.

    Gate blocks along the ``4H`` axis: input, forget, candidate, output.
    Returns every hidden state, shape ``(B, T, H)`` (or ``(T, H)``).
    """
    x, w_ih, w_hh, bias = (as_tensor(t) for t in (x, w_ih, w_hh, bias))
    unbatched = x.ndim == 2
    xd = x.data[None] if unbatched else x.data
    if xd.ndim != 3:
        raise DimensionError(f"lstm input must be (B, T, E) or (T, E), got {x.shape}")
    B, T, E = xd.shape
    if w_ih.ndim != 2 or w_ih.shape[0] != E or w_ih.shape[1] % 4:
        raise DimensionError(f"lstm: W_ih shape {w_ih.shape} incompatible with input {x.shape}")
    H = w_ih.shape[1] // 4
    if w_hh.shape != (H, 4 * H) or bias.shape != (4 * H,):
        raise DimensionError(f"lstm: W_hh {w_hh.shape} / bias {bias.shape} do not match hidden size {H}")
    state = []
    for s in (h0, c0):
        if s is None:
            s = Tensor(np.zeros((B, H)))
        s = as_tensor(s)
        if s.data.reshape(-1).size != B * H:
            raise DimensionError(f"lstm: initial state shape {s.shape} != ({B}, {H})")
        state.append(s)
    h0, c0 = state
    h0d, c0d = h0.data.reshape(B, H), c0.data.reshape(B, H)

    xt = np.ascontiguousarray(xd.transpose(1, 0, 2))
    xw = xt @ w_ih.data + bias.data
    hs, cs, acts = kernels.lstm_forward(xw, w_hh.data, h0d, c0d, backend=backend)
    out = hs.transpose(1, 0, 2)
    if unbatched:
        out = out[0]

    def _back(g):
        g3 = g[None] if unbatched else g
        dhs = np.ascontiguousarray(g3.transpose(1, 0, 2))
        dxw, dw_hh, dh0, dc0 = kernels.lstm_backward(dhs, acts, cs, hs, h0d, c0d, w_hh.data, backend=backend)
        flat = dxw.reshape(-1, 4 * H)
        dw_ih = xt.reshape(-1, E).T @ flat
        db = flat.sum(axis=0)
        dx = (dxw @ w_ih.data.T).transpose(1, 0, 2)
        if unbatched:
            dx = dx[0]
        return dx, dw_ih, dw_hh, db, dh0.reshape(h0.shape), dc0.reshape(c0.shape)

    return _result(np.ascontiguousarray(out), (x, w_ih, w_hh, bias, h0, c0), _back)


def embedding(table, ids, padding_idx=None):
    """Row lookup ``table[ids]``; ``padding_idx`` rows receive no gradient."""
    table = as_tensor(table)
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        bad = ids[(ids < 0) | (ids >= table.shape[0])].reshape(-1)[0]
        raise VocabularyError(f"token id {int(bad)} outside vocabulary of size {table.shape[0]}")
    out = table.data[ids]

    def _back(g):
        dt = np.zeros_like(table.data)
        flat = ids.reshape(-1)
        if flat.size:
            order = np.argsort(flat, kind="stable")
            sorted_ids = flat[order]
            starts = np.flatnonzero(np.r_[True, sorted_ids[1:] != sorted_ids[:-1]])
            dt[sorted_ids[starts]] = np.add.reduceat(g.reshape(-1, table.shape[1])[order], starts, axis=0)
        if padding_idx is not None:
            dt[padding_idx] = 0.0
        return (dt,)

    return _result(out, (table,), _back)


def dropout(x, rate, rng):
    """Inverted dropout; identity when ``rate == 0``."""
    if rate == 0:
        return as_tensor(x)
    x = as_tensor(x)
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return mul(x, Tensor(keep))
