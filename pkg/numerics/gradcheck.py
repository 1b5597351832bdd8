"""Central finite-difference verification of tape gradients."""
from typing import Callable, Tuple

import numpy as np

from numerics.tensor import NdArray, Tape, backward

GRAD_FLOOR = 1e-7


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = GRAD_FLOOR) -> np.ndarray:
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def numeric_gradient(f: Callable[[], NdArray], theta: NdArray, eps: float = 1e-5) -> np.ndarray:
    """Central differences of ``f`` w.r.t. every coordinate of ``theta`` (mutated in place, then restored)."""
    theta.data = np.ascontiguousarray(theta.data)
    flat = theta.data.reshape(-1)
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + eps
        plus = f().item()
        flat[i] = original - eps
        minus = f().item()
        flat[i] = original
        grad[i] = (plus - minus) / (2.0 * eps)
    return grad.reshape(theta.shape)


def analytic_gradient(f: Callable[[], NdArray], theta: NdArray) -> np.ndarray:
    was = theta.requires_grad
    theta.requires_grad = True
    theta.grad = None
    with Tape() as tape:
        loss = f()
    backward(loss, tape)
    grad = np.zeros_like(theta.data) if theta.grad is None else theta.grad
    theta.grad = None
    theta.requires_grad = was
    return grad


def grad_check(f: Callable[[], NdArray], theta: NdArray, eps: float = 1e-5) -> float:
    """Max relative error between the tape gradient and central differences.

    ``f`` closes over ``theta`` and returns a scalar NdArray; it is evaluated
    once under a tape and twice per coordinate without one.
    """
    error, _, _ = grad_check_detail(f, theta, eps)
    return error


def grad_check_detail(
    f: Callable[[], NdArray], theta: NdArray, eps: float = 1e-5
) -> Tuple[float, np.ndarray, np.ndarray]:
    analytic = analytic_gradient(f, theta)
    numeric = numeric_gradient(f, theta, eps)
    if analytic.size == 0:
        return 0.0, analytic, numeric
    return float(np.max(relative_error(analytic, numeric))), analytic, numeric
