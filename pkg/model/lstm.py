"""LSTM recurrences as fused tape ops.

Gate blocks along the last axis are ordered input, forget, output, candidate.
Rows whose mask is False at a step keep their previous state and emit a zero
hidden vector.
"""
from typing import Optional

import numpy as np

from config.errors import DegenerateInputError, DimensionError
from model.params import LstmCellParams
from numerics import NdArray, apply_op, ops


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _gates(pre: np.ndarray, H: int):
    return (
        _sigmoid(pre[:, :H]),
        _sigmoid(pre[:, H:2 * H]),
        _sigmoid(pre[:, 2 * H:3 * H]),
        np.tanh(pre[:, 3 * H:]),
    )


def _gate_grads(gh, gc, i, f, o, g, c_prev, tc):
    """Gradients of the pre-activations given d/dh and d/dc after the step."""
    dc = gc + gh * o * (1.0 - tc * tc)
    dpre = np.concatenate(
        [
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            gh * tc * o * (1.0 - o),
            dc * i * (1.0 - g * g),
        ],
        axis=1,
    )
    return dpre, dc * f


def lstm_step(xp: NdArray, hc: NdArray, U: NdArray, mask: Optional[np.ndarray] = None) -> NdArray:
    """One step for a batch: ``xp`` = x W + b [B x 4H], ``hc`` = previous [h, c] [B x 2H]."""
    H = U.shape[0]
    if xp.ndim != 2 or xp.shape[-1] != 4 * H or hc.shape != (xp.shape[0], 2 * H):
        raise DimensionError("lstm_step", xp.shape, hc.shape, U.shape)
    live = np.ones(xp.shape[0], dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    m = live[:, None]

    h_prev, c_prev = hc.data[:, :H], hc.data[:, H:]
    i, f, o, g = _gates(xp.data + h_prev @ U.data, H)
    c = f * c_prev + i * g
    tc = np.tanh(c)
    out = np.where(m, np.concatenate([o * tc, c], axis=1), hc.data)

    def _backward(G):
        gh = np.where(m, G[:, :H], 0.0)
        gc = np.where(m, G[:, H:], 0.0)
        dpre, dc_prev = _gate_grads(gh, gc, i, f, o, g, c_prev, tc)
        dhc = np.concatenate([dpre @ U.data.T, dc_prev], axis=1) + np.where(m, 0.0, G)
        return dpre, dhc, h_prev.T @ dpre

    return apply_op("lstm_step", out, (xp, hc, U), _backward)


def lstm_sequence(xp: NdArray, U: NdArray, mask: np.ndarray, reverse: bool = False) -> NdArray:
    """Whole recurrence over xp [B x T x 4H] from a zero state; returns hiddens [B x T x H]."""
    H = U.shape[0]
    B, T = mask.shape
    if xp.shape != (B, T, 4 * H):
        raise DimensionError("lstm_sequence", xp.shape, U.shape, mask.shape)
    order = list(reversed(range(T))) if reverse else list(range(T))

    h = np.zeros((B, H))
    c = np.zeros((B, H))
    out = np.zeros((B, T, H))
    cache = {}
    for t in order:
        m = mask[:, t][:, None]
        i, f, o, g = _gates(xp.data[:, t, :] + h @ U.data, H)
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        cache[t] = (h, c, i, f, o, g, tc)
        out[:, t, :] = np.where(m, h_new, 0.0)
        h = np.where(m, h_new, h)
        c = np.where(m, c_new, c)

    def _backward(G):
        dxp = np.zeros_like(xp.data)
        dU = np.zeros_like(U.data)
        dh = np.zeros((B, H))
        dc = np.zeros((B, H))
        for t in reversed(order):
            m = mask[:, t][:, None]
            h_prev, c_prev, i, f, o, g, tc = cache[t]
            dpre, dc_prev = _gate_grads(dh + G[:, t, :], dc, i, f, o, g, c_prev, tc)
            dpre = np.where(m, dpre, 0.0)
            dxp[:, t, :] = dpre
            dU += h_prev.T @ dpre
            dh = np.where(m, dpre @ U.data.T, dh)
            dc = np.where(m, dc_prev, dc)
        return dxp, dU

    return apply_op("lstm_sequence", out, (xp, U), _backward)


def run_lstm(cell: LstmCellParams, x: NdArray, mask: np.ndarray, reverse: bool = False) -> NdArray:
    """Run a cell over x [B x T x d_in] (or [T x d_in]); hiddens come back at the same rank."""
    mask = np.asarray(mask, dtype=bool)
    squeeze = x.ndim == 2
    if squeeze:
        x = ops.expand_dims(x, 0)
        mask = mask[None, :]
    if x.ndim != 3 or mask.shape != x.shape[:2]:
        raise DimensionError("run_lstm", x.shape, mask.shape)
    if x.shape[-1] != cell.input_size:
        raise DimensionError("run_lstm", x.shape, cell.W.shape)
    if x.shape[1] == 0:
        raise DegenerateInputError("run_lstm: empty sequence")

    xp = ops.add(ops.matmul(x, cell.W), cell.b)
    hidden = lstm_sequence(xp, cell.U, mask, reverse=reverse)
    return hidden[0] if squeeze else hidden
