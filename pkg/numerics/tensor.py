"""
Dense float64 tensors with tape-based reverse-mode differentiation.

Operations record themselves on the innermost active ``Tape`` whenever one of
their inputs requires a gradient. Without an active tape, ops evaluate
eagerly and nothing is recorded, which is how inference runs.
"""
import threading
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from config.errors import ContractError, NumericError
from config.settings import NUMERICS_CONFIG

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()
_debug = {"enabled": NUMERICS_CONFIG["debug"]}


def set_debug(enabled: bool) -> None:
    """Toggle NaN/Inf checks on every op output."""
    _debug["enabled"] = bool(enabled)


def _tape_stack() -> List["Tape"]:
    if not hasattr(_state, "tapes"):
        _state.tapes = []
    return _state.tapes


def active_tape() -> Optional["Tape"]:
    stack = _tape_stack()
    return stack[-1] if stack else None


class NdArray:
    """A float64 array that can take part in differentiation."""

    __slots__ = ("data", "requires_grad", "grad", "name", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._parents: Tuple["NdArray", ...] = ()
        self._backward: Optional[BackwardFn] = None
        self._op = "leaf"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name}" if self.name else ""
        return f"NdArray(shape={self.shape}, op={self._op}{label}, requires_grad={self.requires_grad})"

    # Operator sugar; implementations live in numerics.ops
    def __add__(self, other):
        from numerics import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from numerics import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from numerics import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from numerics import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from numerics import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from numerics import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from numerics import ops
        return ops.div(self, other)

    def __neg__(self):
        from numerics import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from numerics import ops
        return ops.matmul(self, other)

    def __getitem__(self, index):
        from numerics import ops
        return ops.getitem(self, index)


def as_array(value) -> NdArray:
    return value if isinstance(value, NdArray) else NdArray(value)


class Tape:
    """Ordered record of differentiable operations.

    Nodes are appended at creation time, so the list is already in
    topological order.
    """

    def __init__(self):
        self.nodes: List[NdArray] = []

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        stack = _tape_stack()
        if not stack or stack[-1] is not self:
            raise ContractError("tape exited out of order")
        stack.pop()

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, node: NdArray) -> None:
        self.nodes.append(node)


def apply_op(
    op: str,
    data: np.ndarray,
    parents: Sequence[NdArray],
    backward: BackwardFn,
) -> NdArray:
    """Wrap a forward result and, under an active tape, record how to differentiate it.

    ``backward`` maps the output gradient to one gradient (or None) per parent.
    """
    out = NdArray.__new__(NdArray)
    out.data = np.asarray(data, dtype=np.float64)
    out.grad = None
    out.name = None
    out._op = op
    if _debug["enabled"] and not np.all(np.isfinite(out.data)):
        raise NumericError(
            f"non-finite output from {op}",
            {"op": op, "shape": out.data.shape, "parents": [p.shape for p in parents]},
        )
    tape = active_tape()
    if tape is not None and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
        tape.record(out)
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def backward(loss: NdArray, tape: Tape) -> None:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every leaf that requires it."""
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad or loss._backward is None:
        raise ContractError("loss was not produced through the tape")

    loss.grad = np.ones_like(loss.data)
    for node in reversed(tape.nodes):
        if node.grad is None:
            continue
        grads = node._backward(node.grad)
        for parent, g in zip(node._parents, grads):
            if g is None or not parent.requires_grad:
                continue
            if g.shape != parent.data.shape:
                g = unbroadcast(g, parent.data.shape)
            parent.grad = g if parent.grad is None else parent.grad + g
        # interior grads are released once propagated
        node.grad = None
    logger.trace(f"backward visited {len(tape.nodes)} nodes")


def parameter(data, name: Optional[str] = None) -> NdArray:
    return NdArray(data, requires_grad=True, name=name)
