"""Differentiable operations over NdArray."""
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from config.errors import DegenerateInputError, DimensionError
from config.settings import NUMERICS_CONFIG
from numerics.tensor import NdArray, apply_op, as_array, unbroadcast

Axis = Optional[Union[int, Tuple[int, ...]]]

COSINE_EPS = NUMERICS_CONFIG["cosine_eps"]
LOG_FLOOR = NUMERICS_CONFIG["log_floor"]


def _binary(op: str, a, b, fn):
    a, b = as_array(a), as_array(b)
    try:
        return a, b, fn(a.data, b.data)
    except ValueError as e:
        raise DimensionError(op, a.shape, b.shape) from e


# ---------------------------------------------------------------------------
# Elementwise arithmetic (numpy broadcasting; tape unbroadcasts gradients)
# ---------------------------------------------------------------------------

def add(a, b) -> NdArray:
    a, b, out = _binary("add", a, b, np.add)
    return apply_op("add", out, (a, b), lambda g: (g, g))


def sub(a, b) -> NdArray:
    a, b, out = _binary("sub", a, b, np.subtract)
    return apply_op("sub", out, (a, b), lambda g: (g, -g))


def mul(a, b) -> NdArray:
    a, b, out = _binary("mul", a, b, np.multiply)
    return apply_op("mul", out, (a, b), lambda g: (g * b.data, g * a.data))


def div(a, b) -> NdArray:
    a, b, out = _binary("div", a, b, np.divide)
    return apply_op(
        "div", out, (a, b),
        lambda g: (g / b.data, -g * a.data / (b.data * b.data)),
    )


def neg(a) -> NdArray:
    a = as_array(a)
    return apply_op("neg", -a.data, (a,), lambda g: (-g,))


def matmul(a, b) -> NdArray:
    """Matrix product with numpy semantics (batched, 1-D operands promoted)."""
    a, b = as_array(a), as_array(b)
    inner_b = b.shape[0] if b.ndim == 1 else (b.shape[-2] if b.ndim >= 2 else None)
    if a.ndim == 0 or b.ndim == 0 or a.shape[-1] != inner_b:
        raise DimensionError("matmul", a.shape, b.shape)
    try:
        out = np.matmul(a.data, b.data)
    except ValueError as e:
        raise DimensionError("matmul", a.shape, b.shape) from e

    def _backward(g):
        A = a.data[None, :] if a.ndim == 1 else a.data
        B = b.data[:, None] if b.ndim == 1 else b.data
        G = g
        if a.ndim == 1:
            G = np.expand_dims(G, -2)
        if b.ndim == 1:
            G = np.expand_dims(G, -1)
        ga = np.matmul(G, np.swapaxes(B, -1, -2))
        gb = np.matmul(np.swapaxes(A, -1, -2), G)
        ga = unbroadcast(ga, A.shape).reshape(a.shape)
        gb = unbroadcast(gb, B.shape).reshape(b.shape)
        return ga, gb

    return apply_op("matmul", out, (a, b), _backward)


# ---------------------------------------------------------------------------
# Nonlinearities
# ---------------------------------------------------------------------------

def tanh(x) -> NdArray:
    x = as_array(x)
    y = np.tanh(x.data)
    return apply_op("tanh", y, (x,), lambda g: (g * (1.0 - y * y),))


def exp(x) -> NdArray:
    x = as_array(x)
    y = np.exp(x.data)
    return apply_op("exp", y, (x,), lambda g: (g * y,))


def clamp_log(x, floor: float = LOG_FLOOR) -> NdArray:
    """log(max(x, floor)); below the floor the gradient is zero."""
    x = as_array(x)
    clamped = np.maximum(x.data, floor)
    live = x.data > floor

    def _backward(g):
        return (np.where(live, g / clamped, 0.0),)

    return apply_op("clamp_log", np.log(clamped), (x,), _backward)


# ---------------------------------------------------------------------------
# Reductions and shape plumbing
# ---------------------------------------------------------------------------

def sum(x, axis: Axis = None, keepdims: bool = False) -> NdArray:  # noqa: A001
    x = as_array(x)
    out = np.sum(x.data, axis=axis, keepdims=keepdims)

    def _backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.array(np.broadcast_to(g, x.shape)),)

    return apply_op("sum", out, (x,), _backward)


def mean(x, axis: Axis = None, keepdims: bool = False) -> NdArray:
    x = as_array(x)
    if axis is None:
        count = x.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([x.shape[a] for a in axes]))
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(x, shape: Sequence[int]) -> NdArray:
    x = as_array(x)
    try:
        out = x.data.reshape(shape)
    except ValueError as e:
        raise DimensionError("reshape", x.shape, tuple(shape)) from e
    return apply_op("reshape", out, (x,), lambda g: (g.reshape(x.shape),))


def transpose(x, axes: Optional[Sequence[int]] = None) -> NdArray:
    x = as_array(x)
    axes = tuple(reversed(range(x.ndim))) if axes is None else tuple(axes)
    inverse = tuple(np.argsort(axes))
    return apply_op("transpose", x.data.transpose(axes), (x,), lambda g: (g.transpose(inverse),))


def expand_dims(x, axis: int) -> NdArray:
    x = as_array(x)
    return reshape(x, np.expand_dims(x.data, axis).shape)


def _is_advanced(index) -> bool:
    parts = index if isinstance(index, tuple) else (index,)
    return any(isinstance(p, (list, np.ndarray)) for p in parts)


def getitem(x, index) -> NdArray:
    x = as_array(x)
    out = x.data[index]
    advanced = _is_advanced(index)

    def _backward(g):
        grad = np.zeros_like(x.data)
        if advanced:
            np.add.at(grad, index, g)
        else:
            grad[index] = g
        return (grad,)

    return apply_op("getitem", np.array(out), (x,), _backward)


def concat(xs: Sequence[NdArray], axis: int = -1) -> NdArray:
    xs = [as_array(x) for x in xs]
    try:
        out = np.concatenate([x.data for x in xs], axis=axis)
    except ValueError as e:
        raise DimensionError("concat", *[x.shape for x in xs]) from e
    sizes = [x.shape[axis] for x in xs]
    bounds = np.cumsum(sizes)[:-1]

    def _backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return apply_op("concat", out, xs, _backward)


def stack(xs: Sequence[NdArray], axis: int = 0) -> NdArray:
    xs = [as_array(x) for x in xs]
    try:
        out = np.stack([x.data for x in xs], axis=axis)
    except ValueError as e:
        raise DimensionError("stack", *[x.shape for x in xs]) from e

    def _backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(xs)))

    return apply_op("stack", out, xs, _backward)


# ---------------------------------------------------------------------------
# Probability and matching primitives
# ---------------------------------------------------------------------------

def softmax(x, axis: int = -1) -> NdArray:
    x = as_array(x)
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / np.sum(e, axis=axis, keepdims=True)

    def _backward(g):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return apply_op("softmax", y, (x,), _backward)


def masked_softmax(x, mask: np.ndarray, axis: int = -1) -> NdArray:
    """Softmax over unmasked entries; masked entries are exactly zero."""
    x = as_array(x)
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
    if not np.all(np.any(mask, axis=axis)):
        raise DegenerateInputError("masked_softmax: every position is masked")
    masked = np.where(mask, x.data, -np.inf)
    shifted = masked - np.max(masked, axis=axis, keepdims=True)
    e = np.where(mask, np.exp(shifted), 0.0)
    y = e / np.sum(e, axis=axis, keepdims=True)

    def _backward(g):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return apply_op("masked_softmax", y, (x,), _backward)


def max_over_time(h, mask: np.ndarray) -> NdArray:
    """Elementwise max over the time axis (-2) of unmasked rows.

    The subgradient goes to the first maximal row.
    """
    h = as_array(h)
    if h.ndim < 2:
        raise DimensionError("max_over_time", h.shape)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != h.shape[:-1]:
        raise DimensionError("max_over_time", h.shape, mask.shape)
    if not np.all(np.any(mask, axis=-1)):
        raise DegenerateInputError("max_over_time: every timestep is masked")
    masked = np.where(mask[..., None], h.data, -np.inf)
    idx = np.argmax(masked, axis=-2)[..., None, :]
    out = np.take_along_axis(h.data, idx, axis=-2)[..., 0, :]

    def _backward(g):
        grad = np.zeros_like(h.data)
        np.put_along_axis(grad, idx, g[..., None, :], axis=-2)
        return (grad,)

    return apply_op("max_over_time", out, (h,), _backward)


def cosine(a, b, eps: float = COSINE_EPS) -> NdArray:
    """Cosine similarity over the last axis, broadcasting leading axes.

    When either norm is below ``eps`` the result is 0 with zero gradient.
    """
    a, b = as_array(a), as_array(b)
    if a.shape[-1:] != b.shape[-1:]:
        raise DimensionError("cosine", a.shape, b.shape)
    try:
        dot = np.sum(a.data * b.data, axis=-1)
    except ValueError as e:
        raise DimensionError("cosine", a.shape, b.shape) from e
    na = np.sqrt(np.sum(a.data * a.data, axis=-1))
    nb = np.sqrt(np.sum(b.data * b.data, axis=-1))
    na, nb = np.broadcast_arrays(na, nb)
    valid = (na >= eps) & (nb >= eps)
    denom = np.where(valid, na * nb, 1.0)
    out = np.where(valid, dot / denom, 0.0)

    def _backward(g):
        scale = np.where(valid, g, 0.0)[..., None]
        cos = out[..., None]
        inv = 1.0 / denom[..., None]
        na2 = np.where(valid, na * na, 1.0)[..., None]
        nb2 = np.where(valid, nb * nb, 1.0)[..., None]
        ga = scale * (b.data * inv - cos * a.data / na2)
        gb = scale * (a.data * inv - cos * b.data / nb2)
        return ga, gb

    return apply_op("cosine", out, (a, b), _backward)


def take_rows(table, ids: np.ndarray) -> NdArray:
    """Gather rows of a 2-D table (embedding lookup)."""
    table = as_array(table)
    ids = np.asarray(ids, dtype=np.int64)
    if table.ndim != 2:
        raise DimensionError("take_rows", table.shape)
    out = table.data[ids]

    def _backward(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, ids.reshape(-1), g.reshape(-1, table.shape[1]))
        return (grad,)

    return apply_op("take_rows", out, (table,), _backward)


def scatter_add(values, index: np.ndarray, size: int) -> NdArray:
    """out[..., index[..., i]] += values[..., i] over a last axis of ``size``."""
    values = as_array(values)
    index = np.asarray(index, dtype=np.int64)
    if index.shape != values.shape:
        raise DimensionError("scatter_add", values.shape, index.shape)
    n = values.shape[-1] if values.ndim else 1
    lead = values.shape[:-1]
    rows = int(np.prod(lead)) if lead else 1
    flat_idx = index.reshape(rows, n)
    row_idx = np.repeat(np.arange(rows), n).reshape(rows, n)
    out = np.zeros((rows, size))
    np.add.at(out, (row_idx, flat_idx), values.data.reshape(rows, n))

    def _backward(g):
        g2 = g.reshape(rows, size)
        return (g2[row_idx, flat_idx].reshape(values.shape),)

    return apply_op("scatter_add", out.reshape(lead + (size,)), (values,), _backward)


def sorted_sum(x, axis: int = 0) -> NdArray:
    """Sum along ``axis`` after sorting, so the result ignores input order."""
    x = as_array(x)
    out = np.sum(np.sort(x.data, axis=axis), axis=axis)

    def _backward(g):
        return (np.array(np.broadcast_to(np.expand_dims(g, axis), x.shape)),)

    return apply_op("sorted_sum", out, (x,), _backward)
