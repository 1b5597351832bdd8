"""Adam with global-norm gradient clipping."""
from typing import Dict, Mapping, Tuple

import numpy as np
from loguru import logger

from numerics import NdArray


def clip_global_norm(params: Mapping[str, NdArray], max_norm: float) -> Tuple[float, float]:
    """Scale every gradient by min(1, max_norm / norm); returns (norm, scale)."""
    sq = 0.0
    for p in params.values():
        if p.grad is not None:
            sq += float(np.sum(p.grad * p.grad))
    norm = float(np.sqrt(sq))
    scale = 1.0 if norm <= max_norm else max_norm / norm
    if scale < 1.0:
        for p in params.values():
            if p.grad is not None:
                p.grad = p.grad * scale
    if norm > 10.0 * max_norm:
        logger.warning(f"Gradient norm {norm:.2f} is over 10x the clip threshold {max_norm}")
    return norm, scale


class Adam:
    def __init__(
        self,
        params: Mapping[str, NdArray],
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = dict(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {n: np.zeros_like(p.data) for n, p in self.params.items()}
        self.v: Dict[str, np.ndarray] = {n: np.zeros_like(p.data) for n, p in self.params.items()}

    def step(self) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            m_hat = self.m[name] / bc1
            v_hat = self.v[name] / bc2
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def state_arrays(self) -> Dict[str, np.ndarray]:
        out = {}
        for name in self.params:
            out[f"adam.m.{name}"] = self.m[name]
            out[f"adam.v.{name}"] = self.v[name]
        return out

    def load_state(self, step: int, arrays: Mapping[str, np.ndarray]) -> None:
        self.t = int(step)
        for name in self.params:
            self.m[name] = np.array(arrays[f"adam.m.{name}"], dtype=np.float64)
            self.v[name] = np.array(arrays[f"adam.v.{name}"], dtype=np.float64)
